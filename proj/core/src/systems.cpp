#include "eigenop/systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "eigenop/basis.hpp"
#include "eigenop/error.hpp"

namespace eigenop {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_angle(double y) {
    double r = std::fmod(y, two_pi);
    if (r < 0) r += two_pi;
    if (r >= two_pi) r -= two_pi;
    return r;
}

double wrap_symmetric(double x) {
    double r = std::fmod(x + std::numbers::pi, two_pi);
    if (r < 0) r += two_pi;
    return r - std::numbers::pi;
}

double angle_distance(double a, double b) {
    const double d = wrap_angle(a - b);
    return std::min(d, two_pi - d);
}

const std::vector<double>& param(const ParameterMap& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw ConfigurationError("systems: missing parameter '" + key + "'");
    return it->second;
}

double scalar(const ParameterMap& p, const std::string& key) {
    const auto& v = param(p, key);
    if (v.size() != 1) throw ConfigurationError("systems: parameter '" + key + "' must be a scalar");
    return v[0];
}

int positive_integer(const ParameterMap& p, const std::string& key) {
    const double v = scalar(p, key);
    if (v < 1 || v != std::floor(v)) throw ConfigurationError("systems: parameter '" + key + "' must be a positive integer");
    return static_cast<int>(v);
}

std::array<double, 3> triple(const ParameterMap& p, const std::string& key) {
    const auto& v = param(p, key);
    if (v.size() != 3) throw ConfigurationError("systems: parameter '" + key + "' must have three entries");
    return {v[0], v[1], v[2]};
}

ShiftFunction shift_from(const ParameterMap& p) {
    ShiftFunction s;
    s.offset = scalar(p, "shift_offset");
    s.amplitude = scalar(p, "shift_amplitude");
    s.steps = param(p, "shift_steps");
    return s;
}

FlowState rk4_step(const ContinuousSkewSystem& sys, const FlowState& x, double h) {
    const double ky1 = sys.base_velocity(x.y);
    const FiberPoint kz1 = sys.fiber_velocity(x.y, x.z);
    const double y2 = x.y + 0.5 * h * ky1;
    const FiberPoint z2 = x.z + 0.5 * h * kz1;
    const double ky2 = sys.base_velocity(y2);
    const FiberPoint kz2 = sys.fiber_velocity(y2, z2);
    const double y3 = x.y + 0.5 * h * ky2;
    const FiberPoint z3 = x.z + 0.5 * h * kz2;
    const double ky3 = sys.base_velocity(y3);
    const FiberPoint kz3 = sys.fiber_velocity(y3, z3);
    const double y4 = x.y + h * ky3;
    const FiberPoint z4 = x.z + h * kz3;
    const double ky4 = sys.base_velocity(y4);
    const FiberPoint kz4 = sys.fiber_velocity(y4, z4);
    FlowState out;
    out.y = x.y + h / 6.0 * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4);
    out.z = x.z + h / 6.0 * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4);
    return out;
}

}  // namespace

std::string to_string(FiberKind kind) {
    switch (kind) {
        case FiberKind::torus: return "torus";
        case FiberKind::cyclic: return "cyclic";
        case FiberKind::lattice: return "lattice";
    }
    return "unknown";
}

double ShiftFunction::operator()(double y) const {
    double v = offset + amplitude * std::sin(y);
    if (!steps.empty()) {
        // Points within 1e-9 of an arc boundary belong to the arc on the right.
        const double t = wrap_angle(y) * static_cast<double>(steps.size()) / two_pi;
        const double r = std::round(t);
        long idx = std::abs(t - r) < 1e-9 ? static_cast<long>(r) : static_cast<long>(std::floor(t));
        idx %= static_cast<long>(steps.size());
        v += steps[static_cast<std::size_t>(idx)];
    }
    return v;
}

bool ShiftFunction::integer_valued() const {
    if (amplitude != 0.0 || offset != std::floor(offset)) return false;
    return std::all_of(steps.begin(), steps.end(), [](double s) { return s == std::floor(s); });
}

std::array<double, 2> fiber_velocity_from_stream(const StreamGradient& gradient, double y, double z1, double z2) {
    const auto g = gradient(y, z1, z2);
    return {-g[1], g[0]};
}

ContinuousSkewSystem make_rotation(double alpha, double beta) {
    ContinuousSkewSystem s;
    s.name = "rotation";
    s.fiber_dimension = 1;
    s.parameters = {{"alpha", {alpha}}, {"beta", {beta}}};
    s.base_velocity = [](double) { return 1.0; };
    s.fiber_velocity = [alpha, beta](double y, const FiberPoint&) {
        FiberPoint v(1);
        v[0] = alpha * (1.0 + beta * std::cos(y));
        return v;
    };
    s.closed_form_base_flow = [](double t, double y) { return y + t; };
    s.closed_form_fiber_flow = [alpha, beta](double t, double y, const FiberPoint& z) {
        FiberPoint out = z;
        out[0] += alpha * (t + beta * (std::sin(y + t) - std::sin(y)));
        return out;
    };
    return s;
}

ContinuousSkewSystem make_stream_system(std::string name, StreamValue value, StreamGradient gradient) {
    ContinuousSkewSystem s;
    s.name = std::move(name);
    s.fiber_dimension = 2;
    s.base_velocity = [](double) { return 1.0; };
    s.stream = std::move(value);
    s.stream_gradient = gradient;
    s.fiber_velocity = [gradient](double y, const FiberPoint& z) {
        const auto v = fiber_velocity_from_stream(gradient, y, z[0], z[1]);
        FiberPoint out(2);
        out << v[0], v[1];
        return out;
    };
    return s;
}

ContinuousSkewSystem make_gaussian_vortex(double kappa) {
    auto value = [kappa](double y, double z1, double z2) {
        return std::exp(kappa * (std::cos(z1 - y) + std::cos(z2)));
    };
    auto gradient = [kappa](double y, double z1, double z2) {
        const double zeta = std::exp(kappa * (std::cos(z1 - y) + std::cos(z2)));
        return std::array<double, 2>{-kappa * std::sin(z1 - y) * zeta, -kappa * std::sin(z2) * zeta};
    };
    auto s = make_stream_system("gaussian_vortex", value, gradient);
    s.parameters = {{"kappa", {kappa}}};
    return s;
}

ContinuousSkewSystem make_stratospheric(const StratosphericParameters& p) {
    const double c3 = p.c3_over_U0 * p.U0;
    auto value = [p, c3](double y, double z1, double z2) {
        const double x = wrap_symmetric(z2);
        const double ch = std::cosh(x / p.L);
        const double sech2 = 1.0 / (ch * ch);
        double v = c3 * x - p.U0 * p.L * std::tanh(x / p.L);
        for (int i = 0; i < 3; ++i) v += p.A[i] * p.U0 * p.L * sech2 * std::cos(p.k[i] * z1 - p.sigma[i] * y);
        return v;
    };
    auto gradient = [p, c3](double y, double z1, double z2) {
        const double x = wrap_symmetric(z2);
        const double ch = std::cosh(x / p.L);
        const double sech2 = 1.0 / (ch * ch);
        const double th = std::tanh(x / p.L);
        double d1 = 0.0;
        double d2 = c3 - p.U0 * sech2;
        for (int i = 0; i < 3; ++i) {
            const double theta = p.k[i] * z1 - p.sigma[i] * y;
            d1 -= p.A[i] * p.U0 * p.L * sech2 * p.k[i] * std::sin(theta);
            d2 -= 2.0 * p.A[i] * p.U0 * sech2 * th * std::cos(theta);
        }
        return std::array<double, 2>{d1, d2};
    };
    auto s = make_stream_system("stratospheric", value, gradient);
    s.parameters = {{"L", {p.L}},
                    {"A", {p.A[0], p.A[1], p.A[2]}},
                    {"k", {p.k[0], p.k[1], p.k[2]}},
                    {"sigma", {p.sigma[0], p.sigma[1], p.sigma[2]}},
                    {"U0", {p.U0}},
                    {"c3_over_U0", {p.c3_over_U0}}};
    return s;
}

DiscreteSkewMap make_torus_translation(int period, ShiftFunction shift) {
    if (period < 1) throw ConfigurationError("torus_translation: period must be positive");
    DiscreteSkewMap m;
    m.name = "torus_translation";
    m.fiber_kind = FiberKind::torus;
    m.base_period = period;
    const double step = two_pi / period;
    m.base_map = [step](double y) { return wrap_angle(y + step); };
    m.base_inverse = [step](double y) { return wrap_angle(y - step); };
    m.fiber_map = [shift](double y, double z) { return z + shift(y); };
    m.shift = std::move(shift);
    m.parameters = {{"period", {static_cast<double>(period)}},
                    {"shift_offset", {m.shift.offset}},
                    {"shift_amplitude", {m.shift.amplitude}},
                    {"shift_steps", m.shift.steps}};
    return m;
}

DiscreteSkewMap make_cyclic_group(int order, int period, ShiftFunction shift) {
    if (order < 1 || period < 1) throw ConfigurationError("cyclic_group: order and period must be positive");
    if (!shift.integer_valued()) throw ConfigurationError("cyclic_group: the fiber shift must be integer valued");
    DiscreteSkewMap m;
    m.name = "cyclic_group";
    m.fiber_kind = FiberKind::cyclic;
    m.fiber_order = order;
    m.base_period = period;
    const double step = two_pi / period;
    m.base_map = [step](double y) { return wrap_angle(y + step); };
    m.base_inverse = [step](double y) { return wrap_angle(y - step); };
    m.fiber_map = [shift, order](double y, double z) {
        long v = (std::lround(z) + std::lround(shift(y))) % order;
        if (v < 0) v += order;
        return static_cast<double>(v);
    };
    m.shift = std::move(shift);
    m.parameters = {{"order", {static_cast<double>(order)}},
                    {"period", {static_cast<double>(period)}},
                    {"shift_offset", {m.shift.offset}},
                    {"shift_amplitude", {m.shift.amplitude}},
                    {"shift_steps", m.shift.steps}};
    return m;
}

DiscreteSkewMap make_z_translation(int period, ShiftFunction shift, int window) {
    if (period < 1 || window < 1) throw ConfigurationError("z_translation: period and window must be positive");
    if (!shift.integer_valued()) throw ConfigurationError("z_translation: the fiber shift must be integer valued");
    DiscreteSkewMap m;
    m.name = "z_translation";
    m.fiber_kind = FiberKind::lattice;
    m.fiber_order = window;
    m.base_period = period;
    const double step = two_pi / period;
    m.base_map = [step](double y) { return wrap_angle(y + step); };
    m.base_inverse = [step](double y) { return wrap_angle(y - step); };
    m.fiber_map = [shift](double y, double z) { return static_cast<double>(std::lround(z) + std::lround(shift(y))); };
    m.shift = std::move(shift);
    m.parameters = {{"period", {static_cast<double>(period)}},
                    {"window", {static_cast<double>(window)}},
                    {"shift_offset", {m.shift.offset}},
                    {"shift_amplitude", {m.shift.amplitude}},
                    {"shift_steps", m.shift.steps}};
    return m;
}

bool is_continuous_system(const std::string& name) {
    return name == "rotation" || name == "gaussian_vortex" || name == "stratospheric";
}

bool is_discrete_map(const std::string& name) {
    return name == "torus_translation" || name == "cyclic_group" || name == "z_translation";
}

ParameterMap default_parameters(const std::string& name) {
    if (name == "rotation") return {{"alpha", {0.7}}, {"beta", {0.5}}};
    if (name == "gaussian_vortex") return {{"kappa", {0.5}}};
    if (name == "stratospheric") {
        const StratosphericParameters p;
        return {{"L", {p.L}},
                {"A", {p.A[0], p.A[1], p.A[2]}},
                {"k", {p.k[0], p.k[1], p.k[2]}},
                {"sigma", {p.sigma[0], p.sigma[1], p.sigma[2]}},
                {"U0", {p.U0}},
                {"c3_over_U0", {p.c3_over_U0}}};
    }
    if (name == "torus_translation")
        return {{"period", {4}}, {"shift_offset", {0.3}}, {"shift_amplitude", {0.5}}, {"shift_steps", {}}};
    if (name == "cyclic_group")
        return {{"order", {6}}, {"period", {3}}, {"shift_offset", {0}}, {"shift_amplitude", {0}}, {"shift_steps", {1, 2, 2}}};
    if (name == "z_translation")
        return {{"period", {4}}, {"window", {16}}, {"shift_offset", {0}}, {"shift_amplitude", {0}}, {"shift_steps", {1, 2}}};
    throw ConfigurationError("systems: unknown system '" + name + "'");
}

ParameterMap resolve_parameters(const std::string& name, const ParameterMap& given) {
    ParameterMap out = default_parameters(name);
    for (const auto& [key, value] : given) {
        if (!out.count(key)) throw ConfigurationError("systems: unknown parameter '" + key + "' for system '" + name + "'");
        out[key] = value;
    }
    return out;
}

ContinuousSkewSystem make_continuous_system(const std::string& name, const ParameterMap& params) {
    const auto p = resolve_parameters(name, params);
    if (name == "rotation") return make_rotation(scalar(p, "alpha"), scalar(p, "beta"));
    if (name == "gaussian_vortex") return make_gaussian_vortex(scalar(p, "kappa"));
    if (name == "stratospheric") {
        StratosphericParameters sp;
        sp.L = scalar(p, "L");
        if (sp.L <= 0) throw ConfigurationError("stratospheric: L must be positive");
        sp.A = triple(p, "A");
        sp.k = triple(p, "k");
        sp.sigma = triple(p, "sigma");
        sp.U0 = scalar(p, "U0");
        sp.c3_over_U0 = scalar(p, "c3_over_U0");
        return make_stratospheric(sp);
    }
    throw ConfigurationError("systems: '" + name + "' is not a continuous system");
}

DiscreteSkewMap make_discrete_map(const std::string& name, const ParameterMap& params) {
    const auto p = resolve_parameters(name, params);
    if (name == "torus_translation") return make_torus_translation(positive_integer(p, "period"), shift_from(p));
    if (name == "cyclic_group")
        return make_cyclic_group(positive_integer(p, "order"), positive_integer(p, "period"), shift_from(p));
    if (name == "z_translation")
        return make_z_translation(positive_integer(p, "period"), shift_from(p), positive_integer(p, "window"));
    throw ConfigurationError("systems: '" + name + "' is not a discrete map");
}

int steps_for(double s, int steps_per_unit_time) {
    return std::max(1, static_cast<int>(std::ceil(steps_per_unit_time * std::abs(s) - 1e-9)));
}

FlowState flow(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double s, int steps) {
    if (steps < 1) throw ConfigurationError("flow: steps must be at least 1");
    FlowState x{y, z};
    if (s == 0.0) return x;
    const double h = s / steps;
    for (int n = 0; n < steps; ++n) {
        x = rk4_step(system, x, h);
        if (!std::isfinite(x.y) || !x.z.allFinite())
            throw IntegrationError("flow: non-finite state after step " + std::to_string(n + 1),
                                   {x.y, static_cast<double>(n + 1)});
    }
    return x;
}

FiberPoint flow_fiber(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double s, int steps) {
    return flow(system, y, z, s, steps).z;
}

double flow_base(const ContinuousSkewSystem& system, double y, double s, int steps) {
    return flow(system, y, FiberPoint::Zero(static_cast<Eigen::Index>(system.fiber_dimension)), s, steps).y;
}

FiberPoint fiber_flow_map(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double s, int steps) {
    if (system.closed_form_fiber_flow) return system.closed_form_fiber_flow(s, y, z);
    return flow_fiber(system, y, z, s, steps);
}

double base_flow_map(const ContinuousSkewSystem& system, double y, double s, int steps) {
    if (system.closed_form_base_flow) return system.closed_form_base_flow(s, y);
    // Base dynamics do not depend on the fiber; integrate the base alone.
    double x = y;
    if (s == 0.0) return x;
    const double h = s / steps;
    for (int n = 0; n < steps; ++n) {
        const double k1 = system.base_velocity(x);
        const double k2 = system.base_velocity(x + 0.5 * h * k1);
        const double k3 = system.base_velocity(x + 0.5 * h * k2);
        const double k4 = system.base_velocity(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

double base_iterate(const DiscreteSkewMap& map, double y, int i) {
    double x = y;
    for (int n = 0; n < std::abs(i); ++n) x = i > 0 ? map.base_map(x) : map.base_inverse(x);
    return x;
}

bool SystemDiagnostics::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const SystemCheck& c) { return c.passed; });
}

const SystemCheck* SystemDiagnostics::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

double divergence(const ContinuousSkewSystem& system, double y, const FiberPoint& z, double h) {
    auto d4 = [h](const std::function<double(double)>& f) {
        return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
    };
    double div = d4([&](double e) { return system.base_velocity(y + e); });
    for (Eigen::Index d = 0; d < z.size(); ++d) {
        div += d4([&](double e) {
            FiberPoint zz = z;
            zz[d] += e;
            return system.fiber_velocity(y, zz)[d];
        });
    }
    return div;
}

SystemDiagnostics validate_system(const ContinuousSkewSystem& system) {
    SystemDiagnostics report;
    report.system = system.name;
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> angle(0.0, two_pi);
    const auto fd = static_cast<Eigen::Index>(system.fiber_dimension);
    auto random_fiber_point = [&] {
        FiberPoint z(fd);
        for (Eigen::Index d = 0; d < fd; ++d) z[d] = angle(rng);
        return z;
    };

    double worst = 0.0;
    for (int n = 0; n < 10; ++n) {
        const double y = angle(rng);
        worst = std::max(worst, std::abs(divergence(system, y, random_fiber_point())));
    }
    report.checks.push_back({"divergence_free", worst <= 1e-6, worst, 1e-6});

    const int P = 64;
    auto f = [](double t) { return 1.0 + std::cos(t) + 0.5 * std::sin(2 * t); };
    worst = 0.0;
    for (double s : {0.1, 0.5, 1.0}) {
        std::vector<double> before(P), after(P);
        for (int p = 0; p < P; ++p) {
            const double y = two_pi * p / P;
            before[p] = f(y);
            after[p] = f(base_flow_map(system, y, s, steps_for(s)));
        }
        worst = std::max(worst, std::abs(pairwise_sum(after) - pairwise_sum(before)) / P);
    }
    report.checks.push_back({"base_measure_preserving", worst <= 1e-10, worst, 1e-10});

    if (system.has_closed_form()) {
        worst = 0.0;
        for (int n = 0; n < 5; ++n) {
            const double y = angle(rng);
            const FiberPoint z = random_fiber_point();
            for (double s : {0.1, 0.5, 1.0}) {
                const auto x = flow(system, y, z, s, 1000);
                worst = std::max(worst, std::abs(x.y - system.closed_form_base_flow(s, y)));
                worst = std::max(worst, (x.z - system.closed_form_fiber_flow(s, y, z)).cwiseAbs().maxCoeff());
            }
        }
        report.checks.push_back({"closed_form_agreement", worst <= 1e-8, worst, 1e-8});

        // Error ratio for successive step halvings at s = 1.
        const double y = 0.3;
        const FiberPoint z = FiberPoint::Constant(fd, 0.2);
        const FiberPoint exact = system.closed_form_fiber_flow(1.0, y, z);
        std::vector<double> errors;
        for (int steps : {4, 8, 16}) errors.push_back((flow_fiber(system, y, z, 1.0, steps) - exact).cwiseAbs().maxCoeff());
        double ratio = 1e300;
        for (std::size_t i = 0; i + 1 < errors.size(); ++i)
            if (errors[i + 1] > 1e-13) ratio = std::min(ratio, errors[i] / errors[i + 1]);
        report.checks.push_back({"fourth_order_convergence", ratio >= 12.0, ratio, 12.0});
    }
    return report;
}

SystemDiagnostics validate_system(const DiscreteSkewMap& map) {
    SystemDiagnostics report;
    report.system = map.name;
    const int samples = 16;
    if (map.base_period) {
        double worst = 0.0;
        for (int p = 0; p < samples; ++p) {
            const double y = two_pi * (p + 0.25) / samples;
            worst = std::max(worst, angle_distance(base_iterate(map, y, *map.base_period), y));
        }
        report.checks.push_back({"base_period", worst <= 1e-12, worst, 1e-12});
    }
    double worst = 0.0;
    for (int p = 0; p < samples; ++p) {
        const double y = two_pi * (p + 0.25) / samples;
        worst = std::max(worst, angle_distance(map.base_inverse(map.base_map(y)), y));
    }
    report.checks.push_back({"base_inverse", worst <= 1e-12, worst, 1e-12});

    worst = 0.0;
    for (int p = 0; p < samples; ++p) {
        const double y = two_pi * (p + 0.25) / samples;
        if (map.fiber_kind == FiberKind::torus) {
            const int P = 64;
            auto f = [](double t) { return 1.0 + std::cos(t) + 0.5 * std::sin(2 * t); };
            std::vector<double> before(P), after(P);
            for (int q = 0; q < P; ++q) {
                const double z = two_pi * q / P;
                before[q] = f(z);
                after[q] = f(map.fiber_map(y, z));
            }
            worst = std::max(worst, std::abs(pairwise_sum(after) - pairwise_sum(before)) / P);
        } else {
            const int lo = map.fiber_kind == FiberKind::cyclic ? 0 : -map.fiber_order;
            const int hi = map.fiber_kind == FiberKind::cyclic ? map.fiber_order - 1 : map.fiber_order;
            std::set<long> image;
            for (int z = lo; z <= hi; ++z) image.insert(std::lround(map.fiber_map(y, z)));
            if (static_cast<int>(image.size()) != hi - lo + 1) worst = 1.0;
        }
    }
    report.checks.push_back({"fiber_measure_preserving", worst <= 1e-10, worst, 1e-10});
    return report;
}

}  // namespace eigenop
