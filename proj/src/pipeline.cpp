#include "spinid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <random>

#include "spinid/error.hpp"

namespace spinid {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Rethrow stage failures with the stage name in front; the kind survives so
// callers can still dispatch on it.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
}

Json fft_peaks(const Signal& sig, double dt) {
    // Coarse DFT magnitude over the principal band; peak list only. This is
    // a diagnostic view, never an input to the estimation chain.
    const double pi = 3.14159265358979323846;
    const int grid = 1024;
    std::vector<double> mag(grid);
    for (int g = 0; g < grid; ++g) {
        double omega = -pi / dt + 2.0 * pi / dt * (g + 0.5) / grid;
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t k = 0; k < sig.times.size(); ++k) {
            double phase = omega * sig.times[k];
            acc += sig.values[k] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        mag[g] = std::abs(acc) * dt;
    }
    double peak_floor = 0.15 * *std::max_element(mag.begin(), mag.end());
    Json peaks = Json::array();
    for (int g = 1; g + 1 < grid; ++g) {
        if (mag[g] < peak_floor || mag[g] < mag[g - 1] || mag[g] <= mag[g + 1]) continue;
        double omega = -pi / dt + 2.0 * pi / dt * (g + 0.5) / grid;
        peaks.push_back({{"frequency", omega}, {"magnitude", mag[g]}});
    }
    return peaks;
}

double block_row_sum_norm(const Eigen::MatrixXd& block) {
    if (block.size() == 0) return 0.0;
    return block.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace

DataMode data_mode_from_string(const std::string& s) {
    if (s == "exact_eigendata") return DataMode::exact_eigendata;
    if (s == "exact_signal") return DataMode::exact_signal;
    if (s == "shot") return DataMode::shot;
    throw Error("bad_spec", "unknown mode '" + s + "'");
}

std::string to_string(DataMode m) {
    switch (m) {
        case DataMode::exact_eigendata: return "exact_eigendata";
        case DataMode::exact_signal: return "exact_signal";
        case DataMode::shot: return "shot";
    }
    return "?";
}

LiftPolicy lift_policy_from_string(const std::string& s) {
    if (s == "none") return LiftPolicy::none;
    if (s == "auto_random") return LiftPolicy::auto_random;
    if (s == "constructive") return LiftPolicy::constructive;
    throw Error("bad_spec", "unknown lift policy '" + s + "'");
}

std::string to_string(LiftPolicy p) {
    switch (p) {
        case LiftPolicy::none: return "none";
        case LiftPolicy::auto_random: return "auto_random";
        case LiftPolicy::constructive: return "constructive";
    }
    return "?";
}

SpinNetwork generate_network(const GeneratorSpec& spec, std::uint64_t seed) {
    if (!(spec.coupling_lo <= spec.coupling_hi))
        throw Error("bad_spec", "coupling range is ill-ordered");
    if (!(spec.coupling_hi < 0.0))
        throw Error("bad_spec", "generated couplings must be strictly negative");
    if (!(spec.field_lo <= spec.field_hi))
        throw Error("bad_spec", "field range is ill-ordered");

    GraphTopology topo = standard_topology(spec.kind, spec.dims);
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> cdist(spec.coupling_lo, spec.coupling_hi);
    std::vector<double> couplings(topo.edges().size());
    for (double& c : couplings) c = cdist(eng);
    std::uniform_real_distribution<double> bdist(spec.field_lo, spec.field_hi);
    std::vector<double> fields(topo.node_count());
    for (double& b : fields) b = bdist(eng);
    return SpinNetwork::checked(std::move(topo), std::move(couplings), std::move(fields),
                                spec.delta, SignConvention::ferromagnetic);
}

std::vector<int> named_gateway(const std::string& name, LatticeKind kind,
                               const std::vector<int>& dims) {
    auto node_total = [&]() {
        int total = 1;
        for (int d : dims) total *= d;
        return total;
    };
    if (name == "all") {
        std::vector<int> out(node_total());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<int>(i);
        return out;
    }
    if (name == "end" && kind == LatticeKind::chain) return {0};
    if (name == "pair" && kind == LatticeKind::cycle) return {0, 1};
    if (name == "side" && kind == LatticeKind::grid2d) {
        std::vector<int> out;
        for (int y = 0; y < dims[1]; ++y) out.push_back(dims[0] * y);
        return out;
    }
    if (name == "face" && kind == LatticeKind::grid3d) {
        std::vector<int> out;
        for (int z = 0; z < dims[2]; ++z)
            for (int y = 0; y < dims[1]; ++y) out.push_back(dims[0] * (y + dims[1] * z));
        std::sort(out.begin(), out.end());
        return out;
    }
    throw Error("invalid_config",
                "gateway rule '" + name + "' does not apply to a " + to_string(kind));
}

RunConfig run_config_from_json(const Json& j) {
    try {
        RunConfig c;
        if (j.value("version", 1) != 1) throw Error("bad_spec", "unsupported config version");
        const Json& net = j.at("network");
        if (net.contains("file")) {
            c.network_path = net.at("file").get<std::string>();
        } else if (net.contains("generator")) {
            const Json& g = net.at("generator");
            c.generator.kind = lattice_kind_from_string(g.at("kind").get<std::string>());
            c.generator.dims = g.at("dims").get<std::vector<int>>();
            if (g.contains("coupling_range")) {
                auto r = g.at("coupling_range").get<std::vector<double>>();
                if (r.size() != 2) throw Error("bad_spec", "coupling_range needs two entries");
                c.generator.coupling_lo = r[0];
                c.generator.coupling_hi = r[1];
            }
            if (g.contains("field_range")) {
                auto r = g.at("field_range").get<std::vector<double>>();
                if (r.size() != 2) throw Error("bad_spec", "field_range needs two entries");
                c.generator.field_lo = r[0];
                c.generator.field_hi = r[1];
            }
            c.generator.delta = g.value("delta", 0.0);
            c.generator.seed = g.value("seed", std::uint64_t{1});
        } else {
            throw Error("bad_spec", "network must name a file or a generator");
        }

        if (j.contains("gateway")) {
            const Json& gw = j.at("gateway");
            if (gw.is_string()) {
                c.gateway_name = gw.get<std::string>();
            } else {
                for (const Json& v : gw) {
                    int id = v.get<int>();
                    if (id < 1) throw Error("bad_spec", "gateway ids are 1-based");
                    c.gateway.push_back(id - 1);
                }
                std::sort(c.gateway.begin(), c.gateway.end());
            }
        }

        c.mode = data_mode_from_string(j.value("mode", std::string("exact_signal")));
        c.shots = j.value("shots", 10000L);
        c.shot_seed = j.value("shot_seed", std::uint64_t{1});
        if (j.contains("sampling")) {
            const Json& s = j.at("sampling");
            c.oversample = s.value("oversample", 2.0);
            c.samples_per_frequency = s.value("samples_per_frequency", 8);
        }
        if (j.contains("lift")) {
            const Json& l = j.at("lift");
            c.lift_policy = lift_policy_from_string(l.value("policy", std::string("none")));
            c.lift_seed = l.value("seed", std::uint64_t{1});
            c.lift_strength = l.value("strength", 0.0);
        }
        if (j.contains("tolerances")) {
            const Json& t = j.at("tolerances");
            c.tol.sv_rel_tol = t.value("sv_rel_tol", 0.0);
            c.tol.noise_sv_factor = t.value("noise_sv_factor", 0.0);
            c.tol.merge_abs = t.value("merge_abs", 0.0);
            c.tol.merge_rel = t.value("merge_rel", 0.0);
            c.tol.dark_floor = t.value("dark_floor", 0.0);
            c.tol.imag_tol = t.value("imag_tol", 0.0);
            c.tol.nonedge_rel = t.value("nonedge_rel", 0.0);
            c.tol.row_norm_tol = t.value("row_norm_tol", 0.0);
            c.tol.zero_pivot_rel = t.value("zero_pivot_rel", 0.0);
            c.tol.group_tol = t.value("group_tol", 0.0);
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_spec", std::string("run config: ") + e.what());
    }
}

Json run_config_to_json(const RunConfig& c) {
    Json j;
    j["version"] = 1;
    if (!c.network_path.empty()) {
        j["network"] = {{"file", c.network_path}};
    } else {
        Json g;
        g["kind"] = to_string(c.generator.kind);
        g["dims"] = c.generator.dims;
        g["coupling_range"] = {c.generator.coupling_lo, c.generator.coupling_hi};
        g["field_range"] = {c.generator.field_lo, c.generator.field_hi};
        g["delta"] = c.generator.delta;
        g["seed"] = c.generator.seed;
        j["network"] = {{"generator", std::move(g)}};
    }
    if (!c.gateway.empty()) {
        Json g = Json::array();
        for (int n : c.gateway) g.push_back(n + 1);
        j["gateway"] = std::move(g);
    } else if (!c.gateway_name.empty()) {
        j["gateway"] = c.gateway_name;
    }
    j["mode"] = to_string(c.mode);
    j["shots"] = c.shots;
    j["shot_seed"] = c.shot_seed;
    j["sampling"] = {{"oversample", c.oversample},
                     {"samples_per_frequency", c.samples_per_frequency}};
    j["lift"] = {{"policy", to_string(c.lift_policy)},
                 {"seed", c.lift_seed},
                 {"strength", c.lift_strength}};
    Json t;
    t["sv_rel_tol"] = c.tol.sv_rel_tol;
    t["noise_sv_factor"] = c.tol.noise_sv_factor;
    t["merge_abs"] = c.tol.merge_abs;
    t["merge_rel"] = c.tol.merge_rel;
    t["dark_floor"] = c.tol.dark_floor;
    t["imag_tol"] = c.tol.imag_tol;
    t["nonedge_rel"] = c.tol.nonedge_rel;
    t["row_norm_tol"] = c.tol.row_norm_tol;
    t["zero_pivot_rel"] = c.tol.zero_pivot_rel;
    t["group_tol"] = c.tol.group_tol;
    j["tolerances"] = std::move(t);
    return j;
}

ErrorTable compare_networks(const SpinNetwork& truth, const ReconstructionResult& result) {
    if (truth.topology.node_count() != result.topology.node_count() ||
        truth.topology.edges() != result.topology.edges())
        throw Error("topology_mismatch", "truth and result use different graphs");

    ErrorTable t;
    const std::size_t ne = truth.couplings.size();
    t.edge_abs.resize(ne);
    t.edge_rel.resize(ne);
    double abs_sum = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        double diff = std::abs(result.edge_couplings[e] - truth.couplings[e]);
        t.edge_abs[e] = diff;
        t.edge_rel[e] = std::abs(truth.couplings[e]) > 0.0
                            ? diff / std::abs(truth.couplings[e])
                            : 0.0;
        t.max_coupling_abs = std::max(t.max_coupling_abs, diff);
        t.max_coupling_rel = std::max(t.max_coupling_rel, t.edge_rel[e]);
        abs_sum += diff;
    }
    t.mean_coupling_abs = ne ? abs_sum / static_cast<double>(ne) : 0.0;

    const std::size_t nn = truth.fields.size();
    t.node_abs.resize(nn);
    t.node_rel.resize(nn);
    abs_sum = 0.0;
    for (std::size_t n = 0; n < nn; ++n) {
        double diff = std::abs(result.fields(static_cast<int>(n)) - truth.fields[n]);
        t.node_abs[n] = diff;
        t.node_rel[n] =
            std::abs(truth.fields[n]) > 0.0 ? diff / std::abs(truth.fields[n]) : 0.0;
        t.max_field_abs = std::max(t.max_field_abs, diff);
        abs_sum += diff;
    }
    t.mean_field_abs = nn ? abs_sum / static_cast<double>(nn) : 0.0;
    t.ground_energy_abs = std::abs(result.ground_energy - truth.ground_energy());
    return t;
}

Report run_pipeline(const RunConfig& config) {
    const auto t_total = Clock::now();
    Report rep;
    rep.config = config;

    std::vector<int> file_gateway;
    stage("network", [&] {
        if (!config.network_path.empty()) {
            NetworkFile nf = read_network_file(config.network_path);
            rep.truth = std::move(nf.network);
            file_gateway = std::move(nf.gateway);
        } else {
            rep.truth = generate_network(config.generator, config.generator.seed);
        }
        return 0;
    });
    const GraphTopology& topo = rep.truth.topology;

    stage("gateway", [&] {
        if (!config.gateway.empty()) {
            rep.gateway = config.gateway;
        } else if (!config.gateway_name.empty()) {
            if (config.network_path.empty() || config.gateway_name == "all") {
                std::vector<int> dims = config.generator.dims;
                LatticeKind kind = config.generator.kind;
                if (!config.network_path.empty()) {
                    dims = {topo.node_count()};
                    kind = LatticeKind::chain;  // only "all" reaches here
                }
                rep.gateway = named_gateway(config.gateway_name, kind, dims);
            } else {
                throw Error("invalid_config",
                            "named gateway rules apply to generated lattices; "
                            "list explicit ids for a file network");
            }
        } else if (!file_gateway.empty()) {
            rep.gateway = file_gateway;
        } else {
            throw Error("invalid_config", "no gateway given");
        }
        GatewaySet gw = GatewaySet::checked(rep.gateway, topo);
        rep.gateway = gw.members;
        rep.forcing = forcing_sequence(topo, gw);
        if (!rep.forcing.infecting)
            throw Error("not_infecting",
                        "gateway reaches only " + std::to_string(rep.forcing.closure.size()) +
                            " of " + std::to_string(topo.node_count()) +
                            " sites; no reconstruction attempted");
        return 0;
    });
    GatewaySet gw{rep.gateway};

    auto t0 = Clock::now();
    SingleExcitationMatrix ham = build_single_excitation(rep.truth);
    Eigensystem eig = eigendecompose(ham);
    rep.degeneracies = find_degeneracies(eig, gw.members, config.tol.group_tol);
    rep.timings.build_ms = ms_since(t0);

    t0 = Clock::now();
    SingleExcitationMatrix effective = ham;
    Eigensystem eig_eff = eig;
    if (!rep.degeneracies.empty()) {
        if (config.lift_policy == LiftPolicy::constructive) {
            stage("lift", [&] {
                ConstructiveLiftOptions lo;
                lo.group_tol = config.tol.group_tol;
                rep.lift = constructive_lift(ham, gw, lo);
                return 0;
            });
            rep.lifted = true;
        } else if (config.lift_policy == LiftPolicy::auto_random) {
            stage("lift", [&] {
                RandomLiftOptions lo;
                lo.group_tol = config.tol.group_tol;
                lo.seed = config.lift_seed;
                lo.strength = config.lift_strength;
                rep.lift = random_field_lift(ham, gw, lo);
                return 0;
            });
            rep.lifted = !rep.lift.operators.empty();
        } else {
            rep.notes.push_back("degenerate levels detected; no lift policy configured");
        }
        if (rep.lifted) {
            effective = rep.lift.lifted;
            eig_eff = rep.lift.lifted_spectrum;
        }
    }
    rep.timings.lift_ms = ms_since(t0);

    const bool shot_mode = config.mode == DataMode::shot;
    Eigendata data;
    if (config.mode == DataMode::exact_eigendata) {
        data = stage("eigendata", [&] { return eigendata_from_spectrum(eig_eff, gw.members); });
        rep.eigendata.gateway = data.gateway;
        rep.eigendata.frequencies = data.frequencies;
        rep.eigendata.components = data.components;
        rep.eigendata.diagnostics.line_count = static_cast<int>(data.frequencies.size());
    } else {
        t0 = Clock::now();
        stage("simulate", [&] {
            if (shot_mode && config.shots <= 0)
                throw Error("invalid_config", "shot mode needs a positive shot count");
            double cmax = 0.0, bmax = 0.0;
            if (config.network_path.empty()) {
                cmax = std::max(std::abs(config.generator.coupling_lo),
                                std::abs(config.generator.coupling_hi));
                bmax = std::max(std::abs(config.generator.field_lo),
                                std::abs(config.generator.field_hi));
            } else {
                for (double c : rep.truth.couplings) cmax = std::max(cmax, std::abs(c));
                for (double b : rep.truth.fields) bmax = std::max(bmax, std::abs(b));
            }
            double bound = spectral_radius_bound(cmax, bmax, topo, rep.truth.delta);
            if (rep.lifted) bound += block_row_sum_norm(rep.lift.total_block);
            std::vector<double> times = nyquist_times(bound, topo.node_count(),
                                                      config.oversample,
                                                      config.samples_per_frequency);
            rep.dataset.shots = shot_mode ? config.shots : 0;
            rep.dataset.rng_seed = config.shot_seed;
            rep.dataset.dt = times[1] - times[0];
            rep.dataset.radius_bound = bound;
            for (int n0 : gw.members) {
                ExperimentConfig ec;
                ec.initial_site = n0;
                ec.observed_sites = gw.members;
                ec.sample_times = times;
                ec.shots = shot_mode ? config.shots : 0;
                ec.rng_seed = config.shot_seed;
                TomographyDataset fam = simulate_tomography(eig_eff, ec);
                for (Signal& s : fam.signals) rep.dataset.signals.push_back(std::move(s));
            }
            return 0;
        });
        rep.timings.simulate_ms = ms_since(t0);

        t0 = Clock::now();
        stage("spectral", [&] {
            SpectralOptions sopt;
            sopt.noise_mode = shot_mode;
            sopt.strict = !shot_mode;
            if (config.tol.sv_rel_tol > 0.0) sopt.sv_rel_tol = config.tol.sv_rel_tol;
            if (config.tol.noise_sv_factor > 0.0)
                sopt.noise_sv_factor = config.tol.noise_sv_factor;
            rep.spectral = estimate_frequencies(rep.dataset.signals, sopt);

            std::vector<FamilyLines> families;
            for (int n0 : gw.members) {
                std::vector<Signal> fam;
                for (const Signal& s : rep.dataset.signals)
                    if (s.initial_site == n0) fam.push_back(s);
                FamilyLines lines;
                lines.initial_site = n0;
                lines.frequencies = rep.spectral.frequencies;
                lines.amplitudes = estimate_amplitudes(fam, rep.spectral.frequencies, sopt);
                families.push_back(std::move(lines));
            }
            rep.design_cond = design_condition(rep.dataset.signals.front().times,
                                               rep.spectral.frequencies);

            AssembleOptions aopt;
            if (config.tol.merge_abs > 0.0) aopt.merge_abs = config.tol.merge_abs;
            if (config.tol.merge_rel > 0.0) aopt.merge_rel = config.tol.merge_rel;
            aopt.dark_floor = config.tol.dark_floor > 0.0 ? config.tol.dark_floor
                                                          : (shot_mode ? 1e-6 : 1e-9);
            aopt.imag_tol = config.tol.imag_tol > 0.0 ? config.tol.imag_tol
                                                      : (shot_mode ? 0.2 : 1e-6);
            rep.eigendata = assemble_eigendata(families, gw.members, aopt);
            rep.fft_view = fft_peaks(rep.dataset.signals.front(), rep.dataset.dt);

            int lines = static_cast<int>(rep.eigendata.frequencies.size());
            if (lines < topo.node_count())
                throw Error("line_count_deficit",
                            "got " + std::to_string(lines) + " lines for " +
                                std::to_string(topo.node_count()) +
                                " sites; degenerate levels collapsed, rerun with a lift "
                                "policy");
            if (lines > topo.node_count())
                throw Error("line_count_excess",
                            "got " + std::to_string(lines) + " lines for " +
                                std::to_string(topo.node_count()) +
                                " sites; spurious lines survived the threshold");
            return 0;
        });
        rep.timings.spectral_ms = ms_since(t0);
        data = eigendata_from_estimate(rep.eigendata);
    }

    t0 = Clock::now();
    rep.result = stage("reconstruct", [&] {
        ReconstructOptions ropt;
        if (shot_mode) {
            ropt.nonedge_rel = 0.2;
            ropt.row_norm_tol = 0.25;
            ropt.zero_pivot_rel = 1e-6;
        }
        if (config.tol.nonedge_rel > 0.0) ropt.nonedge_rel = config.tol.nonedge_rel;
        if (config.tol.row_norm_tol > 0.0) ropt.row_norm_tol = config.tol.row_norm_tol;
        if (config.tol.zero_pivot_rel > 0.0) ropt.zero_pivot_rel = config.tol.zero_pivot_rel;
        if (rep.lifted) ropt.gateway_adjustment = rep.lift.total_block;
        return full_reconstruct(data, topo, rep.truth.convention, rep.truth.delta, ropt);
    });
    rep.timings.reconstruct_ms = ms_since(t0);

    rep.errors = stage("compare", [&] { return compare_networks(rep.truth, rep.result); });
    for (int j = 0; j < eig_eff.eigenvalues.size(); ++j)
        rep.errors.max_energy_abs =
            std::max(rep.errors.max_energy_abs,
                     std::abs(rep.result.energies[static_cast<std::size_t>(j)] -
                              eig_eff.eigenvalues(j)));
    rep.timings.total_ms = ms_since(t_total);
    return rep;
}

Json report_to_json(const Report& rep, bool include_timings) {
    Json j;
    j["version"] = 1;
    j["config"] = run_config_to_json(rep.config);
    j["truth"] = network_to_json(rep.truth, rep.gateway);

    Json forcing;
    forcing["infecting"] = rep.forcing.infecting;
    Json steps = Json::array();
    for (const ForcingStep& s : rep.forcing.sequence.steps)
        steps.push_back({{"infector", s.infector + 1}, {"forced", s.forced + 1}});
    forcing["steps"] = std::move(steps);
    Json closure = Json::array();
    for (int n : rep.forcing.closure) closure.push_back(n + 1);
    forcing["closure"] = std::move(closure);
    j["forcing"] = std::move(forcing);

    Json groups = Json::array();
    for (const DegenerateGroup& g : rep.degeneracies) {
        Json members = Json::array();
        for (int m : g.members) members.push_back(m + 1);
        groups.push_back({{"eigenvalue", g.eigenvalue},
                          {"multiplicity", g.members.size()},
                          {"members", std::move(members)}});
    }
    j["degenerate_groups"] = std::move(groups);
    j["lift"] = rep.lifted ? lift_to_json(rep.lift) : Json(nullptr);

    if (!rep.dataset.signals.empty()) {
        Json ds;
        ds["signals"] = rep.dataset.signals.size();
        ds["samples_per_signal"] = rep.dataset.signals.front().times.size();
        ds["shots"] = rep.dataset.shots;
        ds["seed"] = rep.dataset.rng_seed;
        ds["dt"] = rep.dataset.dt;
        ds["radius_bound"] = rep.dataset.radius_bound;
        j["dataset"] = std::move(ds);

        Json sp;
        sp["line_count"] = rep.eigendata.diagnostics.line_count;
        sp["expected_lines"] = rep.truth.topology.node_count();
        sp["model_order"] = rep.spectral.model_order;
        sp["rank_gap"] = std::isfinite(rep.spectral.rank_gap) ? Json(rep.spectral.rank_gap)
                                                              : Json(nullptr);
        Json sv = Json::array();
        for (int i = 0; i < rep.spectral.singular_values.size(); ++i)
            sv.push_back(rep.spectral.singular_values(i));
        sp["singular_values"] = std::move(sv);
        sp["frequencies"] = rep.spectral.frequencies;
        sp["design_condition"] = rep.design_cond;
        sp["warnings"] = rep.spectral.warnings;
        sp["fft_peaks"] = rep.fft_view.is_null() ? Json::array() : rep.fft_view;
        j["spectral"] = std::move(sp);
    } else {
        j["dataset"] = nullptr;
        j["spectral"] = nullptr;
    }

    Json ed;
    ed["line_count"] = rep.eigendata.diagnostics.line_count;
    ed["max_imag_residue"] = rep.eigendata.diagnostics.max_imag_residue;
    ed["max_rank1_inconsistency"] = rep.eigendata.diagnostics.max_rank1_inconsistency;
    ed["max_amplitude_residual"] = rep.eigendata.diagnostics.max_amplitude_residual;
    ed["warnings"] = rep.eigendata.diagnostics.warnings;
    j["eigendata_diagnostics"] = std::move(ed);

    j["result"] = result_to_json(rep.result);

    Json err;
    err["per_edge_abs"] = rep.errors.edge_abs;
    err["per_edge_rel"] = rep.errors.edge_rel;
    err["per_node_abs"] = rep.errors.node_abs;
    err["per_node_rel"] = rep.errors.node_rel;
    err["max_coupling_abs"] = rep.errors.max_coupling_abs;
    err["mean_coupling_abs"] = rep.errors.mean_coupling_abs;
    err["max_coupling_rel"] = rep.errors.max_coupling_rel;
    err["max_field_abs"] = rep.errors.max_field_abs;
    err["mean_field_abs"] = rep.errors.mean_field_abs;
    err["ground_energy_abs"] = rep.errors.ground_energy_abs;
    err["max_energy_abs"] = rep.errors.max_energy_abs;
    j["errors"] = std::move(err);
    j["notes"] = rep.notes;

    if (include_timings) {
        Json t;
        t["build_ms"] = rep.timings.build_ms;
        t["lift_ms"] = rep.timings.lift_ms;
        t["simulate_ms"] = rep.timings.simulate_ms;
        t["spectral_ms"] = rep.timings.spectral_ms;
        t["reconstruct_ms"] = rep.timings.reconstruct_ms;
        t["total_ms"] = rep.timings.total_ms;
        j["timings"] = std::move(t);
    }
    return j;
}

}  // namespace spinid
