#include "eigenop/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>

#include "eigenop/cocycle.hpp"
#include "eigenop/config.hpp"
#include "eigenop/eigenoperator.hpp"
#include "eigenop/error.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/io.hpp"
#include "eigenop/oracles.hpp"
#include "eigenop/oseledets.hpp"
#include "eigenop/pipeline.hpp"
#include "eigenop/spectra.hpp"

namespace eigenop {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct Context {
    const ValidationOptions& options;
    bool sign_error() const { return options.fixture == "sign_error"; }
    bool reduced_steps() const { return options.fixture == "reduced_steps"; }
};

// Rotation model at its default resolution, shared by several criteria.
struct RotationModel {
    RunConfig config;
    ContinuousSkewSystem system;
    TruncatedBasis basis;
    Grid fiber_grid;
    OperatorMatrix generator;
    SpectrumReport spectrum;
    double alpha = 0.0;
    double beta = 0.0;
    double seconds = 0.0;
};

const RotationModel& rotation_model(int threads) {
    static std::unique_ptr<RotationModel> model;
    if (!model) {
        const auto t0 = Clock::now();
        model = std::make_unique<RotationModel>();
        model->config = parse_config(default_config("rotation"));
        model->system = make_continuous_system("rotation", model->config.parameters);
        model->basis = model->config.basis();
        model->fiber_grid = model->config.fiber_grid();
        model->generator = assemble_generator(model->system, model->basis, model->config.quadrature_grid(), threads).matrix;
        EigOptions eo;
        eo.threads = threads;
        model->spectrum = sort_by_target(eig(model->generator, model->config.decomposition.eig_tolerance, eo),
                                         model->config.decomposition.sort_target);
        model->alpha = model->config.parameters.at("alpha").at(0);
        model->beta = model->config.parameters.at("beta").at(0);
        model->seconds = since(t0);
    }
    return *model;
}

// Orthonormal frame of the eigenvectors concentrated on fiber mode j.
Eigen::MatrixXcd sector_frame(const RotationModel& r, int j) {
    const int mode[1] = {j};
    const auto idx = sector_eigenvectors(r.spectrum.eigenvectors, r.basis, mode);
    Eigen::MatrixXcd cols(r.spectrum.eigenvectors.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) cols.col(static_cast<Eigen::Index>(c)) = r.spectrum.eigenvectors.col(idx[c]);
    return orthonormalize(cols).frame;
}

double nearest_distance(const Eigen::VectorXcd& set, cplx z) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < set.size(); ++i) best = std::min(best, std::abs(set[i] - z));
    return best;
}

void criterion_rotation_spectrum(const Context& ctx, CriterionResult& r) {
    const auto t0 = Clock::now();
    const auto& m = rotation_model(ctx.options.threads);
    std::vector<cplx> expected;
    for (int k = -2; k <= 2; ++k)
        for (int j = -2; j <= 2; ++j) expected.push_back(rotation_generator_eigenvalue(m.alpha, k, j));
    const auto computed = to_list(m.spectrum.eigenvalues);
    const auto match = match_spectra(expected, computed, 1e-6);
    double worst = 0.0;
    std::size_t matched = 0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (match[i] < 0) continue;
        ++matched;
        worst = std::max(worst, std::abs(expected[i] - computed[static_cast<std::size_t>(match[i])]));
    }
    const double secs = std::max(since(t0), m.seconds);
    r.passed = matched == expected.size() && secs < 10.0;
    r.metrics = {{"matched", matched}, {"expected", expected.size()}, {"max_error", worst}, {"seconds", secs}};
    r.detail = std::to_string(matched) + "/25 matched, max error " + sci(worst) + ", " + sci(secs) + " s";
}

void criterion_eigenoperator_formula(const Context& ctx, CriterionResult& r) {
    const auto& m = rotation_model(ctx.options.threads);
    double worst = 0.0, worst_real = 0.0;
    bool all = true;
    for (int j : {1, 2}) {
        const auto frame = sector_frame(m, j);
        for (double y : {0.0, pi / 2.0, pi}) {
            const auto sample = continuous_eigenoperator(m.system, frame, m.basis, m.fiber_grid, y, 0.0, j,
                                                         m.config.evaluation.steps_per_unit_time);
            std::vector<cplx> expected;
            for (int k = -4; k <= 4; ++k) expected.push_back(rotation_oracle(m.alpha, m.beta, k, j, y, 0.0).eigenvalue);
            const auto computed = to_list(sample.eigenvalues);
            const auto match = match_spectra(expected, computed, 1e-8);
            for (std::size_t i = 0; i < expected.size(); ++i) {
                if (match[i] < 0) {
                    all = false;
                    worst = std::max(worst, nearest_distance(sample.eigenvalues, expected[i]));
                } else {
                    worst = std::max(worst, std::abs(expected[i] - computed[static_cast<std::size_t>(match[i])]));
                }
            }
            for (const auto& z : computed) worst_real = std::max(worst_real, std::abs(z.real()));
        }
    }
    r.passed = all && worst <= 1e-8;
    r.metrics = {{"max_error", worst}, {"max_abs_real", worst_real}};
    r.detail = "max error " + sci(worst) + " over j in {1,2}, y in {0, pi/2, pi}";
}

void criterion_cocycle_closed_form(const Context& ctx, CriterionResult& r) {
    const auto& m = rotation_model(ctx.options.threads);
    const int steps = ctx.reduced_steps() ? 4 : 200;
    const TruncatedBasis fb = m.config.fiber_basis();
    const Grid grid({64});
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> Y(0.0, 2.0 * pi), S(0.0, 2.0);
    std::uniform_int_distribution<int> J(-4, 4);
    double worst = 0.0, worst_half = 0.0;
    auto max_error = [&](double y, double s, int j, int spu) {
        FlowSettings settings;
        settings.steps_per_unit_time = spu;
        settings.threads = ctx.options.threads;
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(fb.size()));
        const int mode[1] = {j};
        u[static_cast<Eigen::Index>(*fb.index_of(mode))] = 1.0;
        const auto field = continuous_w_apply(m.system, y, s, u, fb, grid, settings);
        const cplx phase = rotation_oracle(m.alpha, m.beta, 0, j, y, s).phase;
        double e = 0.0;
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const double z = grid.node(0, static_cast<int>(n));
            e = std::max(e, std::abs(field.values[static_cast<Eigen::Index>(n)] - std::polar(1.0, j * z) * phase));
        }
        return e;
    };
    for (int t = 0; t < 20; ++t) {
        const double y = Y(rng), s = S(rng);
        const int j = J(rng);
        worst = std::max(worst, max_error(y, s, j, steps));
        worst_half = std::max(worst_half, max_error(y, s, j, std::max(1, steps / 2)));
    }
    r.passed = worst <= 1e-8;
    json metrics = {{"max_error", worst}, {"steps_per_unit_time", steps}, {"max_error_half_steps", worst_half}};
    if (worst > 1e-13) metrics["observed_order"] = std::log2(worst_half / worst);
    r.metrics = metrics;
    r.detail = "max grid error " + sci(worst) + " at " + std::to_string(steps) + " steps per unit time";
}

void criterion_rank_one(const Context& ctx, CriterionResult& r) {
    const auto& m = rotation_model(ctx.options.threads);
    const auto ys = equispaced_samples(64);
    double worst_real = 0.0, worst = 0.0;
    bool constant = true;
    std::size_t fields = 0;
    for (int j : {1, 2})
        for (int k : {-1, 0, 1}) {
            const cplx target = rotation_generator_eigenvalue(m.alpha, k, j);
            Eigen::Index best = 0;
            for (Eigen::Index i = 1; i < m.spectrum.eigenvalues.size(); ++i)
                if (std::abs(m.spectrum.eigenvalues[i] - target) < std::abs(m.spectrum.eigenvalues[best] - target)) best = i;
            const Eigen::VectorXcd v = m.spectrum.eigenvectors.col(best);
            ++fields;
            for (double y : ys) {
                const auto res = rank_one_spectrum(m.system, v, m.basis, y, m.fiber_grid);
                constant = constant && res.norm_constant;
                worst_real = std::max(worst_real, std::abs(res.value.real()));
                worst = std::max(worst, std::abs(res.value - cplx(0.0, j * m.alpha * (1.0 + m.beta * std::cos(y)))));
            }
        }
    r.passed = worst_real <= 1e-8 && worst <= 1e-8 && constant;
    r.metrics = {{"max_abs_real", worst_real}, {"max_error", worst}, {"eigenfields", fields}, {"norm_constant", constant}};
    r.detail = "max |Re| " + sci(worst_real) + ", max error " + sci(worst) + " over 64 y for " + std::to_string(fields) + " eigenfields";
}

void criterion_shift_invariance(const Context& ctx, CriterionResult& r) {
    const auto& m = rotation_model(ctx.options.threads);
    const auto ys = equispaced_samples(64);
    double worst = 0.0;
    json per_j = json::object();
    for (int j : {1, 2}) {
        const auto frame = sector_frame(m, j);
        const SpectrumSampler sampler = [&](double y, double s) {
            return continuous_eigenoperator(m.system, frame, m.basis, m.fiber_grid, y, s, j, m.config.evaluation.steps_per_unit_time)
                .eigenvalues;
        };
        const auto rep = shift_invariance_check(sampler, ys, {0.1, 0.5, 1.0});
        per_j[std::to_string(j)] = rep.distances;
        worst = std::max(worst, rep.max_distance);
    }
    r.passed = worst <= 1e-6;
    r.metrics = {{"max_distance", worst}, {"distances", per_j}};
    r.detail = "max Hausdorff distance " + sci(worst) + " for s in {0.1, 0.5, 1}, j in {1,2}";
}

struct DiscreteSetup {
    RunConfig config;
    DiscreteSkewMap map;
    DiscreteFiberSpace fiber;
    KoopmanProvider koopman;
    std::vector<SpectralBin> bins;
};

DiscreteSetup discrete_setup(const std::string& name) {
    DiscreteSetup d;
    d.config = parse_config(default_config(name));
    d.map = make_discrete_map(name, d.config.parameters);
    d.fiber = DiscreteFiberSpace::for_map(d.map, d.config.fiber_cutoff);
    d.koopman = koopman_provider(d.map, d.fiber);
    d.bins = periodic_bins(d.config.decomposition.bin_count, *d.map.base_period, d.config.decomposition.bin_offset);
    return d;
}

void criterion_equivariance(const Context&, CriterionResult& r) {
    double worst = 0.0, completeness = 0.0;
    json per = json::object();
    bool periods_ok = true;
    for (const std::string name : {"torus_translation", "cyclic_group"}) {
        const auto d = discrete_setup(name);
        const int n = *d.map.base_period;
        periods_ok = periods_ok && (name == "torus_translation" ? n == 4 : (n == 3 && d.map.fiber_order == 6));
        double w = 0.0, c = 0.0;
        for (double y : equispaced_samples(16)) {
            const auto dec = periodic_subspaces(d.map, y, d.koopman, d.bins, d.fiber.descriptor());
            for (int k = 0; k < n; ++k) {
                const auto uk = static_cast<std::size_t>(k);
                const Eigen::MatrixXcd U = d.koopman(dec.orbit[uk]);
                Eigen::MatrixXcd sum = -Eigen::MatrixXcd::Identity(U.rows(), U.cols());
                for (std::size_t b = 0; b < d.bins.size(); ++b) {
                    w = std::max(w, equivariance_residual(dec.subspaces[b][static_cast<std::size_t>((k + 1) % n)], dec.subspaces[b][uk], U));
                    sum += dec.subspaces[b][uk].projection;
                }
                c = std::max(c, operator_norm(sum));
            }
        }
        per[name] = {{"equivariance", w}, {"completeness", c}};
        worst = std::max(worst, w);
        completeness = std::max(completeness, c);
    }
    r.passed = periods_ok && worst <= 1e-10 && completeness <= 1e-10;
    r.metrics = {{"max_equivariance_residual", worst}, {"max_completeness_defect", completeness}, {"systems", per}};
    r.detail = "equivariance " + sci(worst) + ", completeness " + sci(completeness);
}

void criterion_decomposition_identity(const Context&, CriterionResult& r) {
    double worst = 0.0;
    json per = json::object();
    for (const std::string name : {"torus_translation", "cyclic_group"}) {
        const auto d = discrete_setup(name);
        double w = 0.0;
        for (const auto& bin : d.bins) {
            const auto subs = periodic_subspace_provider(d.map, d.koopman, bin, d.fiber.descriptor());
            for (int i = -2; i <= 2; ++i)
                for (double y : equispaced_samples(8)) w = std::max(w, discrete_identity_residual(d.map, d.koopman, subs, i, y));
        }
        per[name] = w;
        worst = std::max(worst, w);
    }
    r.passed = worst <= 1e-8;
    r.metrics = {{"max_residual", worst}, {"systems", per}};
    r.detail = "max identity residual " + sci(worst) + " over i in -2..2, all bins";
}

void criterion_correspondence(const Context&, CriterionResult& r) {
    const auto d = discrete_setup("torus_translation");
    const auto rep = koopman_correspondence_check(d.map, d.fiber);
    r.passed = rep.max_discrepancy <= 1e-10;
    r.metrics = {{"max_discrepancy", rep.max_discrepancy}, {"tests", rep.discrepancies.size()}};
    r.detail = "max discrepancy " + sci(rep.max_discrepancy);
}

std::vector<double> sorted_real(const Eigen::MatrixXcd& M, double* imag = nullptr) {
    const Eigen::VectorXcd ev = eigenvalues(M);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        out.push_back(ev[i].real());
        if (imag) *imag = std::max(*imag, std::abs(ev[i].imag()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

void criterion_peter_weyl(const Context&, CriterionResult& r) {
    const auto g = symmetric_group_s3();
    double residual = 0.0, unitarity = 0.0, spectrum_error = 0.0, imag = 0.0;
    bool structure = satisfies_group_axioms(g) && irreps_complete(g);
    for (int e = 0; e < static_cast<int>(g.order()); ++e) {
        const auto pw = peter_weyl_blockdiag(g, e);
        residual = std::max(residual, pw.residual);
        unitarity = std::max(unitarity, pw.unitarity_defect);
        const std::string& label = g.elements[static_cast<std::size_t>(e)];
        if (label.size() != 4) continue;  // transpositions are written (ab)
        structure = structure && pw.blocks.size() == 4;
        if (pw.blocks.size() != 4) continue;
        const std::vector<std::vector<double>> expected = {{1.0}, {-1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
        for (std::size_t b = 0; b < 4; ++b) {
            const auto ev = sorted_real(pw.blocks[b].matrix, &imag);
            if (ev.size() != expected[b].size()) {
                structure = false;
                continue;
            }
            for (std::size_t i = 0; i < ev.size(); ++i) spectrum_error = std::max(spectrum_error, std::abs(ev[i] - expected[b][i]));
        }
    }
    spectrum_error = std::max(spectrum_error, imag);
    r.passed = structure && residual <= 1e-12 && unitarity <= 1e-12 && spectrum_error <= 1e-12;
    r.metrics = {{"residual", residual}, {"unitarity_defect", unitarity}, {"block_spectrum_error", spectrum_error}};
    r.detail = "block-diagonal residual " + sci(residual) + ", transposition block spectra error " + sci(spectrum_error);
}

void criterion_smoothing_limit(const Context&, CriterionResult& r) {
    const auto cfg = parse_config(default_config("gaussian_vortex"));
    const auto basis = cfg.basis();
    const auto rule = weight_rule_from_string(cfg.smoothing.rule);
    const std::vector<double> taus = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    std::mt19937_64 rng(10);
    std::normal_distribution<double> N(0.0, 1.0);
    bool monotone = true;
    double final_worst = 0.0;
    json finals = json::array();
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXcd c(static_cast<Eigen::Index>(basis.size()));
        for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = cplx(N(rng), N(rng));
        c.normalize();
        double previous = std::numeric_limits<double>::infinity();
        for (double tau : taus) {
            const auto w = smoothing_weights(basis, tau, cfg.smoothing.p, rule);
            const double gap = (w.weights.cast<cplx>().cwiseProduct(c) - c).norm();
            monotone = monotone && gap < previous;
            previous = gap;
        }
        finals.push_back(previous);
        final_worst = std::max(final_worst, previous);
    }
    r.passed = monotone && final_worst < 1e-6;
    r.metrics = {{"monotone", monotone},
                 {"max_gap_at_tau_1e-6", final_worst},
                 {"gaps_at_tau_1e-6", finals},
                 {"cutoffs", cfg.cutoffs},
                 {"p", cfg.smoothing.p},
                 {"rule", cfg.smoothing.rule},
                 {"vector_norm", 1.0}};
    r.detail = std::string(monotone ? "monotone" : "not monotone") + ", max ||w c - c|| at tau=1e-6 is " + sci(final_worst) +
               " for unit vectors at cutoffs (8,8,8), p=" + sci(cfg.smoothing.p);
}

std::map<std::string, std::string> hashes(const RunResult& run) {
    std::map<std::string, std::string> out;
    for (const auto& a : run.artifacts) out[a.path] = a.sha256;
    out["manifest.json"] = sha256_file(run.directory / "manifest.json");
    return out;
}

bool field_checks(const json& summary, std::size_t expected_panels, bool require_variation, std::string& why) {
    const auto& panels = summary.at("panels");
    if (panels.size() != expected_panels) {
        why = "expected " + std::to_string(expected_panels) + " panels, found " + std::to_string(panels.size());
        return false;
    }
    for (const auto& p : panels) {
        const double norm = p.at("field_norm").get<double>();
        const double input = p.at("input_norm").get<double>();
        const double max_abs = p.at("max_abs").get<double>();
        if (!std::isfinite(norm) || !std::isfinite(max_abs)) {
            why = "non-finite field in panel " + p.at("panel").get<std::string>();
            return false;
        }
        if (norm > input * 1.01 + 1e-12) {
            why = "panel " + p.at("panel").get<std::string>() + " has norm " + sci(norm) + " above its input " + sci(input);
            return false;
        }
        if (require_variation && p.contains("d") && p.at("d").get<int>() >= 2 && p.at("real_spread").get<double>() <= 1e-8) {
            why = "panel " + p.at("panel").get<std::string>() + " is constant";
            return false;
        }
    }
    return true;
}

void criterion_figure_pipelines(const Context& ctx, CriterionResult& r) {
    bool ok = true;
    std::vector<std::string> notes;
    json metrics = json::object();
    for (const std::string name : {"gaussian_vortex", "stratospheric"}) {
        const auto cfg = parse_config(default_config(name));
        std::vector<RunResult> runs;
        std::vector<double> secs;
        for (int k = 0; k < 2; ++k) {
            const fs::path dir = ctx.options.workdir / "pipelines" / name / ("run" + std::to_string(k + 1));
            std::error_code ec;
            fs::remove_all(dir, ec);
            PipelineOptions po;
            po.out = dir;
            po.threads = ctx.options.threads;
            const auto t0 = Clock::now();
            runs.push_back(run_pipeline(cfg, Stage::all, po));
            secs.push_back(since(t0));
        }
        const bool identical = hashes(runs[0]) == hashes(runs[1]);
        const bool fast = std::max(secs[0], secs[1]) < 300.0;
        const json summary = read_json(runs[0].directory / "cocycle_field/summary.json");
        const json spectra = read_json(runs[0].directory / "eigenop/spectra.json");
        std::string why;
        bool fields = false;
        json diag = json::object();
        if (name == "gaussian_vortex") {
            fields = field_checks(summary, cfg.evaluation.d_values.size(), true, why);
            for (std::size_t d : cfg.evaluation.d_values)
                for (const char* ext : {".csv", ".ppm", ".heatmap.json"})
                    if (!fs::exists(runs[0].directory / "cocycle_field" / ("d" + std::to_string(d) + ext))) {
                        fields = false;
                        why = "missing panel d" + std::to_string(d) + ext;
                    }
            diag["eigenoperator_max_abs_real"] = spectra.at("selections").at(0).at("at_y").at("max_abs_real");
        } else {
            fields = field_checks(summary, cfg.decomposition.j.size(), false, why);
            json reals = json::array();
            for (const auto& s : spectra.at("selections")) {
                if (!s.contains("rank_one")) {
                    fields = false;
                    why = "rank-one values missing";
                    continue;
                }
                const double re = s.at("rank_one").at("max_abs_real").get<double>();
                if (!std::isfinite(re)) {
                    fields = false;
                    why = "non-finite rank-one diagnostic";
                }
                reals.push_back(re);
            }
            diag["rank_one_max_abs_real"] = reals;
        }
        metrics[name] = {{"seconds", secs},
                         {"byte_identical", identical},
                         {"artifacts", runs[0].artifacts.size()},
                         {"fields_ok", fields},
                         {"diagnostics", diag}};
        if (!identical) notes.push_back(name + " reruns differ");
        if (!fast) notes.push_back(name + " took " + sci(std::max(secs[0], secs[1])) + " s");
        if (!fields) notes.push_back(name + ": " + why);
        ok = ok && identical && fast && fields;
        notes.push_back(name + " " + sci(std::max(secs[0], secs[1])) + " s");
    }
    r.passed = ok;
    r.metrics = metrics;
    std::ostringstream os;
    for (std::size_t i = 0; i < notes.size(); ++i) os << (i ? ", " : "") << notes[i];
    r.detail = os.str() + (ok ? ", byte-identical reruns" : "");
}

ContinuousSkewSystem with_sign_error(ContinuousSkewSystem s) {
    auto velocity = s.fiber_velocity;
    s.fiber_velocity = [velocity](double y, const FiberPoint& z) {
        FiberPoint v = velocity(y, z);
        v[1] = -v[1];
        return v;
    };
    return s;
}

void criterion_skew_adjointness(const Context& ctx, CriterionResult& r) {
    const auto& m = rotation_model(ctx.options.threads);
    const double rotation = skew_defect_inner(m.generator, m.basis);
    const auto cfg = parse_config(default_config("gaussian_vortex"));
    auto system = make_continuous_system("gaussian_vortex", cfg.parameters);
    if (ctx.sign_error()) system = with_sign_error(system);
    const auto V = assemble_generator(system, cfg.basis(), cfg.quadrature_grid(), ctx.options.threads).matrix;
    const double gaussian = skew_defect_inner(V, cfg.basis());
    r.passed = rotation <= 1e-8 && gaussian <= 1e-4;
    r.metrics = {{"rotation", rotation}, {"gaussian_vortex", gaussian}};
    r.detail = "inner-band ||V+V*||: rotation " + sci(rotation) + ", gaussian_vortex " + sci(gaussian);
}

struct Criterion {
    int id;
    const char* name;
    void (*run)(const Context&, CriterionResult&);
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "rotation generator spectrum", criterion_rotation_spectrum},
        {2, "eigenoperator formula", criterion_eigenoperator_formula},
        {3, "cocycle closed form", criterion_cocycle_closed_form},
        {4, "rank-one spectrum", criterion_rank_one},
        {5, "shift invariance", criterion_shift_invariance},
        {6, "periodic equivariance", criterion_equivariance},
        {7, "discrete decomposition identity", criterion_decomposition_identity},
        {8, "Koopman correspondence", criterion_correspondence},
        {9, "Peter-Weyl block structure", criterion_peter_weyl},
        {10, "smoothing limit", criterion_smoothing_limit},
        {11, "figure pipelines", criterion_figure_pipelines},
        {12, "skew-adjointness", criterion_skew_adjointness},
    };
    return list;
}

}  // namespace

bool ValidationSummary::passed() const {
    return std::all_of(results.begin(), results.end(), [](const CriterionResult& r) { return r.passed; });
}

json ValidationSummary::to_json() const {
    json items = json::array();
    for (const auto& r : results)
        items.push_back({{"id", r.id},
                         {"name", r.name},
                         {"passed", r.passed},
                         {"detail", r.detail},
                         {"seconds", r.seconds},
                         {"metrics", r.metrics}});
    return {{"passed", passed()}, {"fixture", fixture}, {"criteria", items}};
}

std::vector<std::string> validation_fixtures() { return {"sign_error", "reduced_steps"}; }

std::size_t criterion_count() { return criteria().size(); }

std::string format_result(const CriterionResult& r) {
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d ", r.passed ? "PASS" : "FAIL", r.id);
    char tail[32];
    std::snprintf(tail, sizeof tail, " (%.1f s)", r.seconds);
    return std::string(head) + r.name + ": " + r.detail + tail;
}

ValidationSummary run_acceptance(const ValidationOptions& options) {
    if (!options.fixture.empty()) {
        const auto known = validation_fixtures();
        if (std::find(known.begin(), known.end(), options.fixture) == known.end())
            throw ConfigurationError("unknown fixture '" + options.fixture + "'");
    }
    ValidationOptions opts = options;
    if (opts.workdir.empty()) opts.workdir = fs::temp_directory_path() / "eigenop_validate";
    const Context ctx{opts};
    ValidationSummary summary;
    summary.fixture = opts.fixture;
    for (const auto& c : criteria()) {
        if (!opts.only.empty() && std::find(opts.only.begin(), opts.only.end(), c.id) == opts.only.end()) continue;
        CriterionResult r;
        r.id = c.id;
        r.name = c.name;
        const auto t0 = Clock::now();
        try {
            c.run(ctx, r);
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = since(t0);
        if (opts.on_result) opts.on_result(r);
        summary.results.push_back(std::move(r));
    }
    return summary;
}

}  // namespace eigenop
