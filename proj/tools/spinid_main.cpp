// Command line front end. Every subcommand is a thin shell over the library:
// it parses arguments, calls one or two module functions, writes the JSON or
// CSV artifact, and maps failures onto the documented exit codes.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spinid/pipeline.hpp"

namespace {

using spinid::Json;

// Exit code 2 marks usage and input-shape problems, 1 everything that went
// wrong inside the method itself.
int exit_code_for(const std::string& kind) {
    static const std::vector<std::string> usage = {
        "usage", "parse_error", "invalid_config", "bad_spec",
        "bad_dims", "cap_exceeded", "too_large"};
    for (const std::string& u : usage)
        if (kind == u) return 2;
    return 1;
}

int emit_error(const std::string& kind, const std::string& message) {
    Json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    std::cerr << j.dump() << "\n";
    return exit_code_for(kind);
}

std::vector<int> ids_to_index(const std::vector<int>& ids) {
    std::vector<int> out;
    for (int id : ids) {
        if (id < 1) throw spinid::Error("invalid_config", "node ids are 1-based");
        out.push_back(id - 1);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> parse_dims(const std::string& text) {
    std::vector<int> dims;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t next = text.find('x', pos);
        std::string part = text.substr(pos, next == std::string::npos ? next : next - pos);
        try {
            std::size_t used = 0;
            dims.push_back(std::stoi(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw spinid::Error("bad_dims", "cannot parse dimensions '" + text + "'");
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return dims;
}

std::pair<double, double> parse_range(const std::string& text, const std::string& what) {
    std::size_t comma = text.find(',');
    if (comma == std::string::npos)
        throw spinid::Error("bad_spec", what + " wants 'lo,hi', got '" + text + "'");
    try {
        return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
    } catch (const std::exception&) {
        throw spinid::Error("bad_spec", what + " wants 'lo,hi', got '" + text + "'");
    }
}

// SPINID_TOLERANCES holds a JSON object with the same keys as the run
// config's "tolerances" section; it seeds the defaults for every command.
spinid::ToleranceOverrides env_tolerances() {
    spinid::ToleranceOverrides tol;
    const char* raw = std::getenv("SPINID_TOLERANCES");
    if (!raw || !*raw) return tol;
    Json j;
    try {
        j = Json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
        throw spinid::Error("parse_error", std::string("SPINID_TOLERANCES: ") + e.what());
    }
    try {
        tol.sv_rel_tol = j.value("sv_rel_tol", 0.0);
        tol.noise_sv_factor = j.value("noise_sv_factor", 0.0);
        tol.merge_abs = j.value("merge_abs", 0.0);
        tol.merge_rel = j.value("merge_rel", 0.0);
        tol.dark_floor = j.value("dark_floor", 0.0);
        tol.imag_tol = j.value("imag_tol", 0.0);
        tol.nonedge_rel = j.value("nonedge_rel", 0.0);
        tol.row_norm_tol = j.value("row_norm_tol", 0.0);
        tol.zero_pivot_rel = j.value("zero_pivot_rel", 0.0);
        tol.group_tol = j.value("group_tol", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw spinid::Error("parse_error", std::string("SPINID_TOLERANCES: ") + e.what());
    }
    return tol;
}

void merge_env_into(spinid::ToleranceOverrides& tol) {
    spinid::ToleranceOverrides env = env_tolerances();
    auto take = [](double& dst, double src) {
        if (dst <= 0.0 && src > 0.0) dst = src;
    };
    take(tol.sv_rel_tol, env.sv_rel_tol);
    take(tol.noise_sv_factor, env.noise_sv_factor);
    take(tol.merge_abs, env.merge_abs);
    take(tol.merge_rel, env.merge_rel);
    take(tol.dark_floor, env.dark_floor);
    take(tol.imag_tol, env.imag_tol);
    take(tol.nonedge_rel, env.nonedge_rel);
    take(tol.row_norm_tol, env.row_norm_tol);
    take(tol.zero_pivot_rel, env.zero_pivot_rel);
    take(tol.group_tol, env.group_tol);
}

std::vector<int> resolve_gateway(const spinid::NetworkFile& nf,
                                 const std::vector<int>& flag_ids) {
    if (!flag_ids.empty()) return ids_to_index(flag_ids);
    if (!nf.gateway.empty()) return nf.gateway;
    throw spinid::Error("invalid_config",
                        "no gateway: pass --gateway or put one in the network file");
}

spinid::EigendataEstimate estimate_from_dataset(const spinid::TomographyDataset& data,
                                                const spinid::ToleranceOverrides& tol,
                                                bool noise) {
    std::vector<int> gateway;
    for (const spinid::Signal& s : data.signals) gateway.push_back(s.initial_site);
    std::sort(gateway.begin(), gateway.end());
    gateway.erase(std::unique(gateway.begin(), gateway.end()), gateway.end());

    spinid::SpectralOptions sopt;
    sopt.noise_mode = noise;
    sopt.strict = !noise;
    if (tol.sv_rel_tol > 0.0) sopt.sv_rel_tol = tol.sv_rel_tol;
    if (tol.noise_sv_factor > 0.0) sopt.noise_sv_factor = tol.noise_sv_factor;
    spinid::FrequencyEstimate freq = spinid::estimate_frequencies(data.signals, sopt);

    std::vector<spinid::FamilyLines> families;
    for (int n0 : gateway) {
        std::vector<spinid::Signal> fam;
        for (const spinid::Signal& s : data.signals)
            if (s.initial_site == n0) fam.push_back(s);
        spinid::FamilyLines lines;
        lines.initial_site = n0;
        lines.frequencies = freq.frequencies;
        lines.amplitudes = spinid::estimate_amplitudes(fam, freq.frequencies, sopt);
        families.push_back(std::move(lines));
    }

    spinid::AssembleOptions aopt;
    if (tol.merge_abs > 0.0) aopt.merge_abs = tol.merge_abs;
    if (tol.merge_rel > 0.0) aopt.merge_rel = tol.merge_rel;
    aopt.dark_floor = tol.dark_floor > 0.0 ? tol.dark_floor : (noise ? 1e-6 : 1e-9);
    aopt.imag_tol = tol.imag_tol > 0.0 ? tol.imag_tol : (noise ? 0.2 : 1e-6);
    spinid::EigendataEstimate est = spinid::assemble_eigendata(families, gateway, aopt);
    for (const std::string& w : freq.warnings)
        est.diagnostics.warnings.push_back(w);
    return est;
}

Eigen::MatrixXd adjustment_from_lift_file(const std::string& path) {
    Json j = spinid::read_json_file(path);
    try {
        const Json& rows = j.at("total_block");
        Eigen::MatrixXd block(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != static_cast<std::size_t>(block.cols()))
                throw spinid::Error("parse_error", path + ": ragged total_block");
            for (std::size_t c = 0; c < rows[r].size(); ++c)
                block(static_cast<int>(r), static_cast<int>(c)) = rows[r][c].get<double>();
        }
        return block;
    } catch (const nlohmann::json::exception& e) {
        throw spinid::Error("parse_error", path + ": " + e.what());
    }
}

struct OutputSink {
    std::string path;  // empty: stdout only when json is set
    bool json = false;

    void deliver(const Json& j) const {
        if (!path.empty()) spinid::write_json_file(path, j);
        if (json || path.empty()) std::cout << j.dump(2) << "\n";
    }
};

int run_infect(const std::string& network, const std::vector<int>& gateway_ids, bool json) {
    spinid::NetworkFile nf = spinid::read_network_file(network);
    std::vector<int> gateway = resolve_gateway(nf, gateway_ids);
    spinid::GatewaySet gw = spinid::GatewaySet::checked(gateway, nf.network.topology);
    spinid::ForcingOutcome out = spinid::forcing_sequence(nf.network.topology, gw);

    if (json) {
        Json j;
        j["infecting"] = out.infecting;
        Json gwj = Json::array();
        for (int n : gw.members) gwj.push_back(n + 1);
        j["gateway"] = std::move(gwj);
        Json steps = Json::array();
        for (const spinid::ForcingStep& s : out.sequence.steps)
            steps.push_back({{"infector", s.infector + 1}, {"forced", s.forced + 1}});
        j["steps"] = std::move(steps);
        Json closure = Json::array();
        for (int n : out.closure) closure.push_back(n + 1);
        j["closure"] = std::move(closure);
        std::cout << j.dump(2) << "\n";
    } else if (out.infecting) {
        std::cout << "gateway infects all " << nf.network.topology.node_count()
                  << " sites in " << out.sequence.steps.size() << " steps\n";
        for (const spinid::ForcingStep& s : out.sequence.steps)
            std::cout << "  " << s.infector + 1 << " -> " << s.forced + 1 << "\n";
    } else {
        std::cout << "gateway does not infect: stuck at " << out.closure.size() << " of "
                  << nf.network.topology.node_count() << " sites\n  closure:";
        for (int n : out.closure) std::cout << " " << n + 1;
        std::cout << "\n";
    }
    return out.infecting ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spin-network identification toolkit"};
    app.require_subcommand(1);
    int rc = 0;

    // infect
    auto* infect = app.add_subcommand("infect", "check whether a gateway infects the graph");
    std::string in_network;
    std::vector<int> in_gateway;
    bool in_json = false;
    infect->add_option("--network", in_network, "network JSON file")->required();
    infect->add_option("--gateway", in_gateway, "gateway node ids (1-based)");
    infect->add_flag("--json", in_json, "machine-readable output");
    infect->callback([&] { rc = run_infect(in_network, in_gateway, in_json); });

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random network on a standard lattice");
    std::string g_kind, g_dims, g_crange = "-2,-0.5", g_brange = "-1,1", g_out;
    std::string g_gateway_name;
    std::vector<int> g_gateway;
    double g_delta = 0.0;
    std::uint64_t g_seed = 1;
    bool g_json = false;
    gen->add_option("--kind", g_kind, "chain|cycle|grid2d|grid3d")->required();
    gen->add_option("--dims", g_dims, "sizes joined by 'x', e.g. 4x4")->required();
    gen->add_option("--c-range", g_crange, "coupling range lo,hi (negative)");
    gen->add_option("--b-range", g_brange, "field range lo,hi");
    gen->add_option("--delta", g_delta, "anisotropy");
    gen->add_option("--seed", g_seed, "generator seed");
    gen->add_option("--gateway", g_gateway, "gateway node ids (1-based) to embed");
    gen->add_option("--gateway-name", g_gateway_name, "end|pair|side|face|all");
    gen->add_option("-o,--out", g_out, "output network file")->required();
    gen->add_flag("--json", g_json, "echo the file content");
    gen->callback([&] {
        spinid::GeneratorSpec spec;
        spec.kind = spinid::lattice_kind_from_string(g_kind);
        spec.dims = parse_dims(g_dims);
        std::tie(spec.coupling_lo, spec.coupling_hi) = parse_range(g_crange, "--c-range");
        std::tie(spec.field_lo, spec.field_hi) = parse_range(g_brange, "--b-range");
        spec.delta = g_delta;
        spec.seed = g_seed;
        spinid::SpinNetwork net = spinid::generate_network(spec, spec.seed);
        std::vector<int> gateway;
        if (!g_gateway.empty())
            gateway = ids_to_index(g_gateway);
        else if (!g_gateway_name.empty())
            gateway = spinid::named_gateway(g_gateway_name, spec.kind, spec.dims);
        spinid::write_network_file(g_out, net, gateway);
        if (g_json) std::cout << spinid::network_to_json(net, gateway).dump(2) << "\n";
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "produce gateway tomography time series");
    std::string s_network, s_mode = "exact", s_out;
    std::vector<int> s_gateway;
    long s_shots = 10000;
    std::uint64_t s_seed = 1;
    double s_oversample = 2.0;
    int s_spf = 8;
    sim->add_option("--network", s_network, "network JSON file")->required();
    sim->add_option("--mode", s_mode, "exact | shots (then --shots N)")
        ->check(CLI::IsMember({"exact", "shots"}));
    sim->add_option("--shots", s_shots, "shots per sample point in shot mode");
    sim->add_option("--seed", s_seed, "shot sampling seed");
    sim->add_option("--oversample", s_oversample, "Nyquist oversampling factor");
    sim->add_option("--samples-per-frequency", s_spf, "grid points per expected line");
    sim->add_option("--gateway", s_gateway, "gateway node ids (1-based)");
    sim->add_option("-o,--out", s_out, "output CSV path")->required();
    sim->callback([&] {
        spinid::NetworkFile nf = spinid::read_network_file(s_network);
        std::vector<int> gateway = resolve_gateway(nf, s_gateway);
        spinid::GatewaySet gw = spinid::GatewaySet::checked(gateway, nf.network.topology);
        spinid::Eigensystem eig =
            spinid::eigendecompose(spinid::build_single_excitation(nf.network));
        double cmax = 0.0, bmax = 0.0;
        for (double c : nf.network.couplings) cmax = std::max(cmax, std::abs(c));
        for (double b : nf.network.fields) bmax = std::max(bmax, std::abs(b));
        double bound = spinid::spectral_radius_bound(cmax, bmax, nf.network.topology,
                                                     nf.network.delta);
        std::vector<double> times = spinid::nyquist_times(
            bound, nf.network.topology.node_count(), s_oversample, s_spf);
        bool shot = s_mode == "shots";
        if (shot && s_shots <= 0)
            throw spinid::Error("invalid_config", "shot mode needs a positive shot count");
        spinid::TomographyDataset data;
        data.shots = shot ? s_shots : 0;
        data.rng_seed = s_seed;
        data.dt = times[1] - times[0];
        data.radius_bound = bound;
        for (int n0 : gw.members) {
            spinid::ExperimentConfig ec;
            ec.initial_site = n0;
            ec.observed_sites = gw.members;
            ec.sample_times = times;
            ec.shots = data.shots;
            ec.rng_seed = s_seed;
            spinid::TomographyDataset fam = spinid::simulate_tomography(eig, ec);
            for (spinid::Signal& sig : fam.signals) data.signals.push_back(std::move(sig));
        }
        spinid::write_dataset_csv(s_out, data);
        std::cout << "wrote " << data.signals.size() << " signals x "
                  << times.size() << " samples to " << s_out << "\n";
    });

    // estimate
    auto* est = app.add_subcommand("estimate", "recover spectral lines from a dataset");
    std::string e_dataset, e_out;
    bool e_noise = false, e_exact = false, e_json = false;
    est->add_option("--dataset", e_dataset, "CSV produced by simulate")->required();
    est->add_flag("--noise", e_noise, "force noise-mode thresholds");
    est->add_flag("--exact", e_exact, "force exact-mode thresholds");
    est->add_option("-o,--out", e_out, "output eigendata file");
    est->add_flag("--json", e_json, "print the eigendata JSON");
    est->callback([&] {
        if (e_noise && e_exact)
            throw spinid::Error("invalid_config", "--noise and --exact exclude each other");
        spinid::TomographyDataset data = spinid::read_dataset_csv(e_dataset);
        bool noise = e_noise || (!e_exact && data.shots > 0);
        spinid::ToleranceOverrides tol;
        merge_env_into(tol);
        spinid::EigendataEstimate out = estimate_from_dataset(data, tol, noise);
        OutputSink sink{e_out, e_json};
        sink.deliver(spinid::eigendata_to_json(out));
    });

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "identify couplings and fields from eigendata");
    std::string r_eigendata, r_topology, r_lift, r_out;
    bool r_json = false, r_noise = false;
    rec->add_option("--eigendata", r_eigendata, "eigendata JSON file")->required();
    rec->add_option("--topology", r_topology, "network file supplying graph, delta, convention")
        ->required();
    rec->add_option("--lift", r_lift, "lift JSON whose total_block was applied to the data");
    rec->add_flag("--noise", r_noise, "loosen consistency gates for shot-sampled input");
    rec->add_option("-o,--out", r_out, "output result file");
    rec->add_flag("--json", r_json, "print the result JSON");
    rec->callback([&] {
        spinid::NetworkFile nf = spinid::read_network_file(r_topology);
        spinid::EigendataEstimate est_data = spinid::read_eigendata_file(r_eigendata);
        spinid::Eigendata data = spinid::eigendata_from_estimate(est_data);
        spinid::ToleranceOverrides tol;
        merge_env_into(tol);
        spinid::ReconstructOptions ropt;
        if (r_noise) {
            ropt.nonedge_rel = 0.2;
            ropt.row_norm_tol = 0.25;
            ropt.zero_pivot_rel = 1e-6;
        }
        if (tol.nonedge_rel > 0.0) ropt.nonedge_rel = tol.nonedge_rel;
        if (tol.row_norm_tol > 0.0) ropt.row_norm_tol = tol.row_norm_tol;
        if (tol.zero_pivot_rel > 0.0) ropt.zero_pivot_rel = tol.zero_pivot_rel;
        if (!r_lift.empty()) ropt.gateway_adjustment = adjustment_from_lift_file(r_lift);
        spinid::ReconstructionResult result = spinid::full_reconstruct(
            data, nf.network.topology, nf.network.convention, nf.network.delta, ropt);
        OutputSink sink{r_out, r_json};
        sink.deliver(spinid::result_to_json(result));
    });

    // lift
    auto* lift = app.add_subcommand("lift", "split degenerate levels with gateway operators");
    std::string l_network, l_policy, l_out;
    std::vector<int> l_gateway;
    std::uint64_t l_seed = 1;
    double l_strength = 0.0;
    bool l_json = false;
    lift->add_option("--network", l_network, "network JSON file")->required();
    lift->add_option("--policy", l_policy, "constructive | random")
        ->required()
        ->check(CLI::IsMember({"constructive", "random"}));
    lift->add_option("--seed", l_seed, "random policy seed");
    lift->add_option("--strength", l_strength, "random policy field strength");
    lift->add_option("--gateway", l_gateway, "gateway node ids (1-based)");
    lift->add_option("-o,--out", l_out, "output lift file");
    lift->add_flag("--json", l_json, "print the lift JSON");
    lift->callback([&] {
        spinid::NetworkFile nf = spinid::read_network_file(l_network);
        std::vector<int> gateway = resolve_gateway(nf, l_gateway);
        spinid::GatewaySet gw = spinid::GatewaySet::checked(gateway, nf.network.topology);
        spinid::SingleExcitationMatrix ham = spinid::build_single_excitation(nf.network);
        spinid::ToleranceOverrides tol;
        merge_env_into(tol);
        spinid::LiftOutcome out;
        if (l_policy == "constructive") {
            spinid::ConstructiveLiftOptions lo;
            lo.group_tol = tol.group_tol;
            out = spinid::constructive_lift(ham, gw, lo);
        } else {
            spinid::RandomLiftOptions lo;
            lo.group_tol = tol.group_tol;
            lo.seed = l_seed;
            lo.strength = l_strength;
            out = spinid::random_field_lift(ham, gw, lo);
        }
        OutputSink sink{l_out, l_json};
        sink.deliver(spinid::lift_to_json(out));
    });

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "run the whole identification experiment");
    std::string p_config, p_out, p_plot, p_seeds;
    bool p_json = false;
    pipe->add_option("--config", p_config, "run configuration JSON")->required();
    pipe->add_option("-o,--out", p_out, "output report file");
    pipe->add_option("--plot", p_plot, "write an SVG of signals and recovered lines");
    pipe->add_option("--seeds", p_seeds, "a..b fans the run out over seeds");
    pipe->add_flag("--json", p_json, "print the report JSON");
    pipe->callback([&] {
        spinid::RunConfig config = spinid::run_config_from_json(
            spinid::read_json_file(p_config));
        merge_env_into(config.tol);
        if (p_seeds.empty()) {
            spinid::Report rep = spinid::run_pipeline(config);
            if (!p_plot.empty()) {
                if (rep.dataset.signals.empty())
                    throw spinid::Error("invalid_config",
                                        "plot needs a signal-producing mode");
                spinid::write_signal_plot(p_plot, rep.dataset, &rep.eigendata);
            }
            Json j = spinid::report_to_json(rep);
            OutputSink sink{p_out, p_json};
            sink.deliver(j);
            if (!p_json && !p_out.empty())
                std::cout << "max coupling error " << rep.errors.max_coupling_abs
                          << ", max field error " << rep.errors.max_field_abs
                          << ", report in " << p_out << "\n";
            return;
        }
        if (!p_plot.empty())
            throw spinid::Error("invalid_config", "--plot applies to single runs only");
        std::size_t sep = p_seeds.find("..");
        if (sep == std::string::npos)
            throw spinid::Error("invalid_config", "--seeds wants a..b");
        long a = 0, b = 0;
        try {
            a = std::stol(p_seeds.substr(0, sep));
            b = std::stol(p_seeds.substr(sep + 2));
        } catch (const std::exception&) {
            throw spinid::Error("invalid_config", "--seeds wants a..b");
        }
        if (b < a) throw spinid::Error("invalid_config", "--seeds range is empty");
        Json all = Json::array();
        for (long s = a; s <= b; ++s) {
            spinid::RunConfig c = config;
            c.generator.seed = static_cast<std::uint64_t>(s);
            c.shot_seed = static_cast<std::uint64_t>(s);
            c.lift_seed = static_cast<std::uint64_t>(s);
            spinid::Report rep = spinid::run_pipeline(c);
            Json entry;
            entry["seed"] = s;
            entry["report"] = spinid::report_to_json(rep);
            all.push_back(std::move(entry));
        }
        OutputSink sink{p_out, p_json};
        sink.deliver(all);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        return emit_error("usage", e.what());
    } catch (const spinid::Error& e) {
        return emit_error(e.kind(), e.what());
    } catch (const std::exception& e) {
        return emit_error("internal", e.what());
    }
    return rc;
}
