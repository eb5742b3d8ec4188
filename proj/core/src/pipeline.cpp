#include "eigenop/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>

#include <Eigen/Core>
#include <openssl/opensslv.h>

#include "eigenop/cocycle.hpp"
#include "eigenop/eigenoperator.hpp"
#include "eigenop/error.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/io.hpp"
#include "eigenop/oracles.hpp"
#include "eigenop/oseledets.hpp"
#include "eigenop/spectra.hpp"

namespace eigenop {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::assemble: return "assemble";
        case Stage::eig: return "eig";
        case Stage::oseledets: return "oseledets";
        case Stage::eigenop: return "eigenop";
        case Stage::cocycle_field: return "cocycle-field";
        case Stage::all: return "all";
    }
    return "unknown";
}

Stage stage_from_string(const std::string& name) {
    for (Stage s : {Stage::assemble, Stage::eig, Stage::oseledets, Stage::eigenop, Stage::cocycle_field, Stage::all})
        if (to_string(s) == name) return s;
    throw ConfigurationError("unknown stage '" + name + "'");
}

namespace {

constexpr Stage kOrder[] = {Stage::assemble, Stage::eig, Stage::oseledets, Stage::eigenop, Stage::cocycle_field};

std::string compiler_version() {
#ifdef __VERSION__
    return __VERSION__;
#else
    return "unknown";
#endif
}

json versions() {
    return {{"eigenop", EIGENOP_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                  "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"openssl", OPENSSL_VERSION_TEXT},
            {"compiler", compiler_version()}};
}

double max_abs_real(const Eigen::VectorXcd& v) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i].real()));
    return m;
}

double max_abs_real(const std::vector<cplx>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z.real()));
    return m;
}

json complex_list(const std::vector<cplx>& v) {
    json out = json::array();
    for (const auto& z : v) out.push_back({z.real(), z.imag()});
    return out;
}

json to_json(const AggregatedSpectrum& a) {
    return {{"values", complex_list(a.values)},
            {"support", a.support},
            {"y_samples", a.y_samples.size()},
            {"tolerance", a.tolerance},
            {"max_abs_real", max_abs_real(a.values)}};
}

json to_json(const FiberSubspace& s) {
    return {{"y", s.y},
            {"origin", to_string(s.origin)},
            {"requested_rank", s.requested_rank},
            {"effective_rank", s.effective_rank()},
            {"ambient_size", s.ambient_size()},
            {"dropped", s.dropped},
            {"warnings", s.warnings}};
}

json to_json(const SystemDiagnostics& d) {
    json checks = json::array();
    for (const auto& c : d.checks)
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"threshold", c.threshold}});
    return {{"system", d.system}, {"passed", d.passed()}, {"checks", checks}};
}

std::string signed_name(int i) { return i < 0 ? "m" + std::to_string(-i) : std::to_string(i); }

double field_max_abs(const FieldSample& f) {
    return f.values.size() ? f.values.cwiseAbs().maxCoeff() : 0.0;
}

double field_spread(const FieldSample& f) {
    if (f.values.size() == 0) return 0.0;
    const Eigen::VectorXd re = f.values.real();
    return re.maxCoeff() - re.minCoeff();
}

class Writer {
public:
    Writer(fs::path root, const OutputConfig& out, RunResult& result) : root_(std::move(root)), out_(out), result_(result) {}

    const fs::path& root() const { return root_; }

    void json_file(const std::string& rel, const json& j) {
        write_json(root_ / rel, j);
        record(rel);
    }

    // Returns false when the export is skipped for size.
    bool matrix(const std::string& rel, const Eigen::MatrixXcd& M, const json& meta = json::object(), bool force = false) {
        if (!force) {
            if (!out_.matrices) return false;
            if (static_cast<std::size_t>(std::max(M.rows(), M.cols())) > out_.max_matrix_dim) {
                result_.skipped.push_back(rel);
                return false;
            }
        }
        write_matrix(root_ / rel, M, meta);
        record(rel);
        return true;
    }

    void field(const std::string& stem, const FieldSample& f) {
        if (out_.csv) {
            write_field_csv(root_ / (stem + ".csv"), f);
            record(stem + ".csv");
        }
        if (out_.ppm && f.grid.dimensionality() == 2) {
            write_heatmap(root_ / (stem + ".ppm"), root_ / (stem + ".heatmap.json"), f);
            record(stem + ".ppm");
            record(stem + ".heatmap.json");
        }
    }

    void record(const std::string& rel) {
        auto it = std::find_if(result_.artifacts.begin(), result_.artifacts.end(), [&](const Artifact& a) { return a.path == rel; });
        const std::string hash = sha256_file(root_ / rel);
        if (it != result_.artifacts.end())
            it->sha256 = hash;
        else
            result_.artifacts.push_back({rel, hash});
    }

private:
    fs::path root_;
    const OutputConfig& out_;
    RunResult& result_;
};

template <class F>
void run_stage(const std::string& name, const PipelineOptions& options, RunResult& result, F&& body) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigurationError& e) {
        throw StageError(name, StageError::Category::configuration, e.what());
    } catch (const NumericalError& e) {
        throw StageError(name, StageError::Category::numerical, e.what());
    } catch (const IoError& e) {
        throw StageError(name, StageError::Category::io, e.what());
    } catch (const fs::filesystem_error& e) {
        throw StageError(name, StageError::Category::io, e.what());
    } catch (const std::exception& e) {
        throw StageError(name, StageError::Category::numerical, e.what());
    }
    result.stages.push_back(name);
    if (options.log) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.2f s", secs);
        options.log(name + ": done in " + buf);
    }
}

bool wants(Stage last, Stage s) {
    if (last == Stage::all) return true;
    for (Stage o : kOrder) {
        if (o == s) return true;
        if (o == last) return false;
    }
    return false;
}

// Eigenpairs of a previous run, valid when its manifest matches the config hash and
// the cached files are unchanged.
std::optional<std::pair<Eigen::VectorXcd, Eigen::MatrixXcd>> cached_eigenpairs(const fs::path& root, const std::string& hash) {
    const fs::path manifest = root / "manifest.json";
    if (!fs::exists(manifest)) return std::nullopt;
    try {
        const json m = read_json(manifest);
        if (m.value("config_hash", std::string()) != hash) return std::nullopt;
        std::map<std::string, std::string> listed;
        for (const auto& a : m.at("artifacts")) listed[a.at("path").get<std::string>()] = a.at("sha256").get<std::string>();
        for (const char* rel : {"eig/spectrum.json", "eig/eigenvalues.json", "eig/eigenvectors.json"}) {
            if (!listed.count(rel) || !fs::exists(root / rel) || sha256_file(root / rel) != listed[rel]) return std::nullopt;
        }
        Eigen::MatrixXcd values = read_matrix(root / "eig/eigenvalues.json");
        Eigen::MatrixXcd vectors = read_matrix(root / "eig/eigenvectors.json");
        return std::make_pair(Eigen::VectorXcd(values.col(0)), vectors);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void run_continuous(const RunConfig& cfg, Stage last, const PipelineOptions& options, Writer& w, RunResult& result) {
    const auto system = make_continuous_system(cfg.system, cfg.parameters);
    const TruncatedBasis basis = cfg.basis();
    const TruncatedBasis fiber_basis = cfg.fiber_basis();
    const Grid grid = cfg.quadrature_grid();
    const Grid fiber_grid = cfg.fiber_grid();
    const auto& dec = cfg.decomposition;
    const auto& ev = cfg.evaluation;
    const int spu = ev.steps_per_unit_time;

    OperatorMatrix op;
    run_stage("assemble", options, result, [&] {
        const auto diagnostics = validate_system(system);
        auto assembly = assemble_generator(system, basis, grid, options.threads);
        json report = {{"system", cfg.system},
                       {"diagnostics", to_json(diagnostics)},
                       {"basis", to_json(assembly.matrix.rows)},
                       {"grid", grid.points()},
                       {"dimension", basis.size()},
                       {"aliasing_indicator", assembly.report.aliasing_indicator},
                       {"aliasing_warning", assembly.report.aliasing_warning},
                       {"warnings", assembly.report.warnings},
                       {"skew_defect_inner", skew_defect_inner(assembly.matrix, basis)}};
        w.matrix("assemble/generator.json", assembly.matrix.entries, {{"provenance", to_string(assembly.matrix.provenance)}});
        op = assembly.matrix;
        json smoothing = {{"enabled", cfg.smoothing.enabled}};
        if (cfg.smoothing.enabled) {
            const auto weights = smoothing_weights(basis, cfg.smoothing.tau, cfg.smoothing.p,
                                                   weight_rule_from_string(cfg.smoothing.rule));
            op = smoothed_generator(assembly.matrix, weights, cfg.smoothing.symmetric);
            smoothing = {{"enabled", true},
                         {"tau", weights.tau},
                         {"p", weights.p},
                         {"rule", to_string(weights.rule)},
                         {"symmetric", cfg.smoothing.symmetric},
                         {"min_weight", weights.weights.minCoeff()},
                         {"skew_defect_inner", skew_defect_inner(op, basis)}};
            w.matrix("assemble/smoothed_generator.json", op.entries, {{"provenance", to_string(op.provenance)}});
        }
        report["smoothing"] = smoothing;
        w.json_file("assemble/report.json", report);
    });
    if (!wants(last, Stage::eig)) return;

    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors;
    run_stage("eig", options, result, [&] {
        if (auto cached = cached_eigenpairs(w.root(), cfg.hash)) {
            values = cached->first;
            vectors = cached->second;
            result.eig_reused = true;
            for (const char* rel : {"eig/spectrum.json", "eig/eigenvalues.json", "eig/eigenvectors.json"}) w.record(rel);
            if (options.log) options.log("eig: reusing cached eigenpairs");
            return;
        }
        EigOptions eo;
        eo.threads = options.threads;
        auto report = sort_by_target(eig(op, dec.eig_tolerance, eo), dec.sort_target);
        const std::size_t keep = dec.mode == "fiber_sector" ? report.size() : std::min(report.size(), cfg.leading_vectors());
        values = report.eigenvalues;
        vectors = report.eigenvectors.leftCols(static_cast<Eigen::Index>(keep));
        json doc = to_json(report);
        doc["dimension"] = report.size();
        doc["stored_vectors"] = keep;
        doc["max_abs_real"] = max_abs_real(report.eigenvalues);
        w.json_file("eig/spectrum.json", doc);
        w.matrix("eig/eigenvalues.json", Eigen::MatrixXcd(values), {{"content", "eigenvalues"}}, true);
        w.matrix("eig/eigenvectors.json", vectors, {{"content", "eigenvectors"}, {"order", "nearest_target"}}, true);
    });
    if (!wants(last, Stage::oseledets)) return;

    const BasisDescriptor fiber_desc = BasisDescriptor::fourier(fiber_basis);
    // Per selection: orthonormal frame in full coefficient space and the column indices used.
    std::vector<Eigen::MatrixXcd> frames;
    std::vector<int> selections;
    if (dec.mode == "leading_span") {
        selections = {static_cast<int>(dec.d)};
    } else {
        selections = dec.j;
    }
    run_stage("oseledets", options, result, [&] {
        json doc = {{"mode", dec.mode}, {"y", ev.y}, {"subspaces", json::array()}};
        for (int sel : selections) {
            Eigen::MatrixXcd cols;
            json entry;
            if (dec.mode == "leading_span") {
                cols = vectors.leftCols(sel);
                entry["d"] = sel;
            } else if (dec.mode == "rank_one") {
                cols = vectors.col(sel - 1);
                entry["j"] = sel;
            } else {
                const int mode[1] = {sel};
                const auto idx = sector_eigenvectors(vectors, basis, mode);
                cols.resize(vectors.rows(), static_cast<Eigen::Index>(idx.size()));
                for (std::size_t c = 0; c < idx.size(); ++c) cols.col(static_cast<Eigen::Index>(c)) = vectors.col(idx[c]);
                entry["j"] = sel;
                entry["sector_eigenvectors"] = idx.size();
            }
            const auto ortho = orthonormalize(cols);
            if (ortho.frame.cols() == 0) throw NumericalError("empty subspace for selection " + std::to_string(sel));
            frames.push_back(ortho.frame);
            FiberSubspace sub = make_subspace(ev.y, restrict_columns(cols, basis, ev.y), SubspaceOrigin::restricted_eigvecs, fiber_desc);
            entry["at_y"] = to_json(sub);
            entry["full_rank"] = ortho.frame.cols();
            const std::string stem = "oseledets/frame_" + std::to_string(sel) + ".json";
            w.matrix(stem, sub.frame, {{"y", ev.y}, {"selection", sel}});
            doc["subspaces"].push_back(entry);
        }
        w.json_file("oseledets/subspaces.json", doc);
    });
    if (!wants(last, Stage::eigenop)) return;

    const auto ys = equispaced_samples(ev.y_samples);
    run_stage("eigenop", options, result, [&] {
        json doc = {{"mode", dec.mode}, {"s", ev.s}, {"y", ev.y}, {"selections", json::array()}};
        for (std::size_t n = 0; n < selections.size(); ++n) {
            const int sel = selections[n];
            const int j = dec.mode == "leading_span" ? 0 : sel;
            json entry = {{"selection", sel}};
            auto sample_at = [&](double y) {
                return continuous_eigenoperator(system, frames[n], basis, fiber_grid, y, ev.s, j, spu).eigenvalues;
            };
            const Eigen::VectorXcd at_y = sample_at(ev.y);
            entry["at_y"] = {{"eigenvalues", eigenop::complex_list(at_y)}, {"max_abs_real", max_abs_real(at_y)}};
            std::vector<Eigen::VectorXcd> spectra;
            for (double y : ys) spectra.push_back(sample_at(y));
            entry["aggregated"] = to_json(aggregate(ys, spectra, 1e-8));
            if (dec.mode == "rank_one") {
                json values = json::array();
                double worst = 0.0;
                bool constant = true;
                std::vector<std::string> warnings;
                for (double y : ys) {
                    const auto r = rank_one_spectrum(system, vectors.col(sel - 1), basis, y, fiber_grid);
                    values.push_back({{"y", y}, {"value", {r.value.real(), r.value.imag()}}, {"norm", r.norm}});
                    worst = std::max(worst, std::abs(r.value.real()));
                    constant = constant && r.norm_constant;
                    for (const auto& msg : r.warnings)
                        if (std::find(warnings.begin(), warnings.end(), msg) == warnings.end()) warnings.push_back(msg);
                }
                entry["rank_one"] = {{"samples", values}, {"max_abs_real", worst}, {"norm_constant", constant}, {"warnings", warnings}};
            }
            doc["selections"].push_back(entry);
        }
        w.json_file("eigenop/spectra.json", doc);
    });
    if (!wants(last, Stage::cocycle_field)) return;

    run_stage("cocycle-field", options, result, [&] {
        const Grid field_grid(ev.field_grid);
        FlowSettings fs_settings;
        fs_settings.steps_per_unit_time = spu;
        fs_settings.threads = options.threads;
        const double hs_y = base_flow_map(system, ev.y, ev.s, steps_for(ev.s, spu));
        json doc = {{"mode", dec.mode}, {"y", ev.y}, {"s", ev.s}, {"h_s_y", hs_y}, {"grid", ev.field_grid}, {"panels", json::array()}};
        auto emit = [&](const std::string& stem, const FiberSubspace& target, const Eigen::VectorXcd& u, json entry) {
            const FieldSample f = hatw_field(system, target, ev.y, ev.s, u, fiber_basis, field_grid, fs_settings);
            w.field("cocycle_field/" + stem, f);
            entry["panel"] = stem;
            entry["input_norm"] = u.norm();
            entry["field_norm"] = field_norm(f);
            entry["max_abs"] = field_max_abs(f);
            entry["real_spread"] = field_spread(f);
            doc["panels"].push_back(entry);
        };
        if (dec.mode == "leading_span") {
            const FiberSubspace target = restrict_at_base(vectors, basis, hs_y, dec.d);
            for (std::size_t d : ev.d_values) {
                const auto q = test_vector(vectors, basis, ev.y, d);
                emit("d" + std::to_string(d), target, q.coeffs, {{"d", d}, {"target_rank", target.effective_rank()}});
            }
        } else {
            for (std::size_t n = 0; n < selections.size(); ++n) {
                const int sel = selections[n];
                const Eigen::MatrixXcd restricted_target = restrict_columns(frames[n], basis, hs_y);
                const FiberSubspace target = make_subspace(hs_y, restricted_target, SubspaceOrigin::restricted_eigvecs, fiber_desc);
                Eigen::VectorXcd u;
                if (dec.mode == "rank_one") {
                    u = restrict_vector(vectors.col(sel - 1), basis, ev.y);
                } else {
                    u = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(fiber_basis.size()));
                    const int mode[1] = {sel};
                    u[static_cast<Eigen::Index>(*fiber_basis.index_of(mode))] = 1.0;
                }
                emit("j" + std::to_string(sel), target, u, {{"j", sel}, {"target_rank", target.effective_rank()}});
            }
        }
        w.json_file("cocycle_field/summary.json", doc);
    });
}

json to_json(const ArcSet& a) {
    json arcs = json::array();
    for (const auto& arc : a.arcs) arcs.push_back({arc.begin, arc.end});
    return {{"arcs", arcs}, {"points", a.points}, {"full_circle", a.is_full_circle()}};
}

// Lattice fibers carry continuous spectrum: the spectral projections are Fourier
// multipliers and the eigenoperators are described by their symbol ranges.
void run_lattice(const RunConfig& cfg, const DiscreteSkewMap& map, const KoopmanProvider& koopman,
                 const std::vector<double>& orbit, Stage last, const PipelineOptions& options, Writer& w, RunResult& result) {
    const auto& ev = cfg.evaluation;
    const int n = *map.base_period;
    const double y = ev.y;
    auto shift_at = [&](double x) { return static_cast<int>(std::lround(map.shift(x))); };
    run_stage("eig", options, result, [&] {
        json shifts = json::array();
        for (double x : orbit) shifts.push_back({{"y", x}, {"shift", shift_at(x)}});
        w.json_file("eig/symbol.json", {{"y", y}, {"period", n}, {"orbit_shifts", shifts}});
    });
    if (!wants(last, Stage::oseledets)) return;

    const auto bins = periodic_bins(cfg.decomposition.bin_count, n, cfg.decomposition.bin_offset);
    run_stage("oseledets", options, result, [&] {
        json doc = {{"y", y}, {"bins", json::array()}};
        for (std::size_t b = 0; b < bins.size(); ++b) {
            json arcs = json::array();
            for (const auto& a : bins[b].arcs) arcs.push_back({a.begin, a.end});
            doc["bins"].push_back({{"bin", b}, {"arcs", arcs}, {"measure", bins[b].measure()}});
        }
        doc["partition"] = is_partition(bins);
        w.json_file("oseledets/bins.json", doc);
    });
    if (!wants(last, Stage::eigenop)) return;

    run_stage("eigenop", options, result, [&] {
        json doc = {{"y", y}, {"i_range", {ev.i_min, ev.i_max}}, {"symbols", json::array()}};
        for (std::size_t b = 0; b < bins.size(); ++b)
            for (int i = ev.i_min; i <= ev.i_max; ++i) {
                const int shift = shift_at(base_iterate(map, y, i));
                json entry = to_json(z_fiber_symbol(shift, bins[b]));
                entry["bin"] = b;
                entry["i"] = i;
                entry["shift"] = shift;
                doc["symbols"].push_back(entry);
            }
        w.json_file("eigenop/symbols.json", doc);
    });
    if (!wants(last, Stage::cocycle_field)) return;

    run_stage("cocycle-field", options, result, [&] {
        const BasisDescriptor desc = BasisDescriptor::lattice(map.fiber_order);
        json doc = {{"y", y}, {"cocycles", json::array()}};
        for (int i = ev.i_min; i <= ev.i_max; ++i) {
            const auto c = discrete_w(map, y, i, koopman, desc);
            w.matrix("cocycle_field/w_" + signed_name(i) + ".json", c.matrix.entries, {{"y", y}, {"i", i}});
            doc["cocycles"].push_back({{"i", i}, {"unitarity_defect", c.unitarity_defect}});
        }
        w.json_file("cocycle_field/summary.json", doc);
    });
}

void run_discrete(const RunConfig& cfg, Stage last, const PipelineOptions& options, Writer& w, RunResult& result) {
    const auto map = make_discrete_map(cfg.system, cfg.parameters);
    const auto fiber = DiscreteFiberSpace::for_map(map, cfg.fiber_cutoff);
    const BasisDescriptor desc = fiber.descriptor();
    const auto& ev = cfg.evaluation;
    const int n = *map.base_period;
    const double y = ev.y;

    // Koopman matrices and subspaces are requested repeatedly along orbits.
    std::map<double, Eigen::MatrixXcd> koopman_cache;
    const KoopmanProvider raw = koopman_provider(map, fiber);
    const KoopmanProvider koopman = [&](double x) -> Eigen::MatrixXcd {
        auto it = koopman_cache.find(x);
        if (it == koopman_cache.end()) it = koopman_cache.emplace(x, raw(x)).first;
        return it->second;
    };
    std::vector<double> orbit(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) orbit[static_cast<std::size_t>(k)] = base_iterate(map, y, k);

    run_stage("assemble", options, result, [&] {
        json doc = {{"system", cfg.system},
                    {"diagnostics", to_json(validate_system(map))},
                    {"fiber", {{"kind", to_string(map.fiber_kind)}, {"basis", to_json(desc)}, {"size", fiber.size()}}},
                    {"period", n},
                    {"orbit", orbit},
                    {"koopman", json::array()}};
        for (int k = 0; k < n; ++k) {
            const Eigen::MatrixXcd U = koopman(orbit[static_cast<std::size_t>(k)]);
            const double defect = (U.adjoint() * U - Eigen::MatrixXcd::Identity(U.rows(), U.cols())).norm();
            doc["koopman"].push_back({{"k", k}, {"y", orbit[static_cast<std::size_t>(k)]}, {"unitarity_defect", defect}});
            w.matrix("assemble/koopman_" + std::to_string(k) + ".json", U, {{"y", orbit[static_cast<std::size_t>(k)]}});
        }
        w.matrix("assemble/block_operator.json", block_operator(map, y, koopman), {{"y", y}});
        w.json_file("assemble/report.json", doc);
    });
    if (!wants(last, Stage::eig)) return;
    if (map.fiber_kind == FiberKind::lattice) {
        run_lattice(cfg, map, koopman, orbit, last, options, w, result);
        return;
    }

    run_stage("eig", options, result, [&] {
        const auto data = block_spectral_data(map, y, koopman);
        std::vector<double> phases(data.phases.data(), data.phases.data() + data.phases.size());
        w.json_file("eig/block_spectrum.json", {{"y", y},
                                                {"period", data.period},
                                                {"block", data.block},
                                                {"eigenvalues", eigenop::complex_list(data.eigenvalues)},
                                                {"phases", phases},
                                                {"normality_defect", data.normality_defect}});
    });
    if (!wants(last, Stage::oseledets)) return;

    const auto bins = periodic_bins(cfg.decomposition.bin_count, n, cfg.decomposition.bin_offset);
    run_stage("oseledets", options, result, [&] {
        const auto decomposition = periodic_subspaces(map, y, koopman, bins, desc);
        json doc = {{"y", y}, {"orbit", decomposition.orbit}, {"warnings", decomposition.warnings}, {"bins", json::array()}};
        double worst_equivariance = 0.0;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            json arcs = json::array();
            for (const auto& a : bins[b].arcs) arcs.push_back({a.begin, a.end});
            json entry = {{"bin", b}, {"arcs", arcs}, {"subspaces", json::array()}};
            for (int k = 0; k < n; ++k) {
                const auto& at = decomposition.subspaces[b][static_cast<std::size_t>(k)];
                const auto& next = decomposition.subspaces[b][static_cast<std::size_t>((k + 1) % n)];
                const double res = equivariance_residual(next, at, koopman(orbit[static_cast<std::size_t>(k)]));
                worst_equivariance = std::max(worst_equivariance, res);
                json s = to_json(at);
                s["k"] = k;
                s["equivariance_residual"] = res;
                entry["subspaces"].push_back(s);
                w.matrix("oseledets/projection_b" + std::to_string(b) + "_k" + std::to_string(k) + ".json", at.projection,
                         {{"bin", b}, {"k", k}, {"y", at.y}});
            }
            doc["bins"].push_back(entry);
        }
        double completeness = 0.0;
        for (int k = 0; k < n; ++k) {
            Eigen::MatrixXcd sum = -Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(fiber.size()), static_cast<Eigen::Index>(fiber.size()));
            for (std::size_t b = 0; b < bins.size(); ++b) sum += decomposition.subspaces[b][static_cast<std::size_t>(k)].projection;
            completeness = std::max(completeness, operator_norm(sum));
        }
        doc["max_equivariance_residual"] = worst_equivariance;
        doc["completeness_defect"] = completeness;
        w.json_file("oseledets/subspaces.json", doc);
    });
    if (!wants(last, Stage::eigenop)) return;

    std::vector<std::map<double, FiberSubspace>> subspace_cache(bins.size());
    auto provider = [&](std::size_t b) -> SubspaceProvider {
        return [&, b](double x) {
            auto& cache = subspace_cache[b];
            auto it = cache.find(x);
            if (it == cache.end()) it = cache.emplace(x, periodic_subspace_at(map, x, koopman, bins[b], desc)).first;
            return it->second;
        };
    };
    const auto ys = equispaced_samples(ev.y_samples);
    run_stage("eigenop", options, result, [&] {
        json doc = {{"y", y}, {"i_range", {ev.i_min, ev.i_max}}, {"spectra", json::array()}};
        double worst_identity = 0.0;
        for (std::size_t b = 0; b < bins.size(); ++b) {
            const auto subs = provider(b);
            for (int i = ev.i_min; i <= ev.i_max; ++i) {
                const auto rep = discrete_eigenoperator_spectrum(map, koopman, subs, i, static_cast<int>(b), ys);
                const double identity = discrete_identity_residual(map, koopman, subs, i, y);
                worst_identity = std::max(worst_identity, identity);
                doc["spectra"].push_back({{"bin", b},
                                          {"i", i},
                                          {"aggregated", to_json(rep.spectrum)},
                                          {"max_unit_circle_defect", rep.max_unit_circle_defect},
                                          {"identity_residual", identity}});
            }
        }
        doc["max_identity_residual"] = worst_identity;
        w.json_file("eigenop/spectra.json", doc);
    });
    if (!wants(last, Stage::cocycle_field)) return;

    run_stage("cocycle-field", options, result, [&] {
        json doc = {{"y", y}, {"cocycles", json::array()}};
        for (int i = ev.i_min; i <= ev.i_max; ++i) {
            const auto c = discrete_w(map, y, i, koopman, desc);
            w.matrix("cocycle_field/w_" + signed_name(i) + ".json", c.matrix.entries, {{"y", y}, {"i", i}});
            doc["cocycles"].push_back({{"i", i}, {"unitarity_defect", c.unitarity_defect}});
        }
        if (map.fiber_kind == FiberKind::torus) {
            CorrespondenceSettings cs;
            cs.seed = options.seed;
            const auto rep = koopman_correspondence_check(map, fiber, cs);
            doc["correspondence"] = {{"max_discrepancy", rep.max_discrepancy},
                                     {"discrepancies", rep.discrepancies},
                                     {"base_samples", rep.base_samples},
                                     {"seed", options.seed}};
        }
        w.json_file("cocycle_field/summary.json", doc);
    });
}

}  // namespace

RunResult run_pipeline(const RunConfig& config, Stage last, const PipelineOptions& options) {
    RunResult result;
    result.directory = options.out.empty() ? fs::path(config.outputs.directory) : options.out;
    try {
        fs::create_directories(result.directory);
    } catch (const fs::filesystem_error& e) {
        throw StageError("setup", StageError::Category::io, e.what());
    }
    Writer w(result.directory, config.outputs, result);
    if (config.discrete)
        run_discrete(config, last, options, w, result);
    else
        run_continuous(config, last, options, w, result);

    std::sort(result.artifacts.begin(), result.artifacts.end(), [](const Artifact& a, const Artifact& b) { return a.path < b.path; });
    std::sort(result.skipped.begin(), result.skipped.end());
    json artifacts = json::array();
    for (const auto& a : result.artifacts) artifacts.push_back({{"path", a.path}, {"sha256", a.sha256}});
    result.manifest = {{"format", "eigenop-manifest"},
                       {"version", 1},
                       {"config_hash", config.hash},
                       {"config", config.resolved},
                       {"defaults_applied", config.defaults_applied},
                       {"stages", result.stages},
                       {"seed", options.seed},
                       {"artifacts", artifacts},
                       {"skipped_exports", result.skipped},
                       {"versions", versions()}};
    try {
        write_json(result.directory / "manifest.json", result.manifest);
    } catch (const std::exception& e) {
        throw StageError("manifest", StageError::Category::io, e.what());
    }
    return result;
}

}  // namespace eigenop
