#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eigenop {

using FiberPoint = Eigen::VectorXd;

/// Named parameters; scalars are stored as one-element lists.
using ParameterMap = std::map<std::string, std::vector<double>>;

/// (d zeta/d z1, d zeta/d z2) at (y, z1, z2).
using StreamGradient = std::function<std::array<double, 2>(double, double, double)>;
using StreamValue = std::function<double(double, double, double)>;

struct ContinuousSkewSystem {
    std::string name;
    std::size_t fiber_dimension = 1;
    std::function<double(double)> base_velocity;
    std::function<FiberPoint(double, const FiberPoint&)> fiber_velocity;
    std::function<double(double, double)> closed_form_base_flow;                           // (s, y)
    std::function<FiberPoint(double, double, const FiberPoint&)> closed_form_fiber_flow;   // (s, y, z)
    StreamValue stream;
    StreamGradient stream_gradient;
    ParameterMap parameters;

    bool has_closed_form() const { return static_cast<bool>(closed_form_base_flow) && static_cast<bool>(closed_form_fiber_flow); }
};

enum class FiberKind { torus, cyclic, lattice };

std::string to_string(FiberKind kind);

/// g~(y) = offset + amplitude sin y + steps[arc(y)], where arc(y) splits [0, 2pi)
/// into steps.size() equal half-open arcs.
struct ShiftFunction {
    double offset = 0.0;
    double amplitude = 0.0;
    std::vector<double> steps;

    double operator()(double y) const;
    bool integer_valued() const;
};

struct DiscreteSkewMap {
    std::string name;
    FiberKind fiber_kind = FiberKind::torus;
    int fiber_order = 0;  // m for cyclic fibers, window half-width for lattice fibers
    std::function<double(double)> base_map;
    std::function<double(double)> base_inverse;
    std::function<double(double, double)> fiber_map;  // (y, z) -> z'
    std::optional<int> base_period;
    ShiftFunction shift;
    ParameterMap parameters;
};

std::array<double, 2> fiber_velocity_from_stream(const StreamGradient& gradient, double y, double z1, double z2);

ContinuousSkewSystem make_rotation(double alpha, double beta);
ContinuousSkewSystem make_gaussian_vortex(double kappa);

struct StratosphericParameters {
    double L = 0.1;
    std::array<double, 3> A{0.075, 0.4, 0.2};
    std::array<double, 3> k{1.0, 2.0, 3.0};
    std::array<double, 3> sigma{-2.0, -1.0, 0.0};
    double U0 = 62.66;
    double c3_over_U0 = 0.7;
};

ContinuousSkewSystem make_stratospheric(const StratosphericParameters& p = {});

/// Two-dimensional fiber system with unit base speed driven by a stream function.
ContinuousSkewSystem make_stream_system(std::string name, StreamValue value, StreamGradient gradient);

DiscreteSkewMap make_torus_translation(int period, ShiftFunction shift);
DiscreteSkewMap make_cyclic_group(int order, int period, ShiftFunction shift);
DiscreteSkewMap make_z_translation(int period, ShiftFunction shift, int window);

bool is_continuous_system(const std::string& name);
bool is_discrete_map(const std::string& name);
ParameterMap default_parameters(const std::string& name);
/// Fills defaults and rejects unknown parameter names.
ParameterMap resolve_parameters(const std::string& name, const ParameterMap& given);
ContinuousSkewSystem make_continuous_system(const std::string& name, const ParameterMap& params);
DiscreteSkewMap make_discrete_map(const std::string& name, const ParameterMap& params);

struct FlowState {
    double y = 0.0;
    FiberPoint z;
};

int steps_for(double s, int steps_per_unit_time = 200);

/// Classical fixed-step RK4 on the coupled (y, z) system.
FlowState flow(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double s, int steps);
FiberPoint flow_fiber(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double s, int steps);
double flow_base(const ContinuousSkewSystem& system, double y, double s, int steps);

/// Closed form when available, RK4 otherwise.
FiberPoint fiber_flow_map(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double s, int steps);
double base_flow_map(const ContinuousSkewSystem& system, double y, double s, int steps);

/// Iterates the base map i times (inverse for negative i).
double base_iterate(const DiscreteSkewMap& map, double y, int i);

struct SystemCheck {
    std::string name;
    bool passed = false;
    double residual = 0.0;
    double threshold = 0.0;
};

struct SystemDiagnostics {
    std::string system;
    std::vector<SystemCheck> checks;

    bool passed() const;
    const SystemCheck* find(const std::string& name) const;
};

double divergence(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double h = 1e-4);

SystemDiagnostics validate_system(const ContinuousSkewSystem& system);
SystemDiagnostics validate_system(const DiscreteSkewMap& map);

}  // namespace eigenop
