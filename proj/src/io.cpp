#include "spinid/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "spinid/error.hpp"

namespace spinid {

namespace {

std::string meta_path(const std::string& csv_path) { return csv_path + ".meta.json"; }

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

[[noreturn]] void bad_file(const std::string& path, const std::string& why) {
    throw Error("parse_error", path + ": " + why);
}

std::vector<int> gateway_from_ids(const Json& ids, int node_count, const std::string& path) {
    std::vector<int> gateway;
    for (const Json& v : ids) {
        if (!v.is_number_integer()) bad_file(path, "gateway entries must be integer ids");
        int id = v.get<int>();
        if (id < 1 || id > node_count)
            bad_file(path, "gateway id " + std::to_string(id) + " out of range");
        gateway.push_back(id - 1);
    }
    std::sort(gateway.begin(), gateway.end());
    if (std::adjacent_find(gateway.begin(), gateway.end()) != gateway.end())
        bad_file(path, "duplicate gateway id");
    return gateway;
}

}  // namespace

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("parse_error", path + ": cannot open");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        bad_file(path, e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw Error("parse_error", path + ": cannot open for writing");
    out << j.dump(2) << "\n";
    if (!out) throw Error("parse_error", path + ": write failed");
}

Json network_to_json(const SpinNetwork& net, const std::vector<int>& gateway) {
    Json j;
    j["version"] = 1;
    j["delta"] = net.delta;
    j["convention"] = to_string(net.convention);
    Json nodes = Json::array();
    for (int n = 0; n < net.topology.node_count(); ++n)
        nodes.push_back({{"id", n + 1}, {"b", net.fields[n]}});
    j["nodes"] = std::move(nodes);
    Json edges = Json::array();
    for (std::size_t e = 0; e < net.topology.edges().size(); ++e) {
        const auto& [m, n] = net.topology.edges()[e];
        edges.push_back({{"m", m + 1}, {"n", n + 1}, {"c", net.couplings[e]}});
    }
    j["edges"] = std::move(edges);
    if (!gateway.empty()) {
        Json g = Json::array();
        for (int n : gateway) g.push_back(n + 1);
        j["gateway"] = std::move(g);
    }
    return j;
}

NetworkFile network_from_json(const Json& j) {
    const std::string path = "network";
    try {
        if (j.value("version", 1) != 1) bad_file(path, "unsupported version");
        double delta = j.at("delta").get<double>();
        SignConvention conv = sign_convention_from_string(j.at("convention").get<std::string>());

        const Json& nodes = j.at("nodes");
        int count = static_cast<int>(nodes.size());
        if (count == 0) bad_file(path, "no nodes");
        std::vector<double> fields(count, 0.0);
        std::vector<char> seen(count, 0);
        for (const Json& node : nodes) {
            int id = node.at("id").get<int>();
            if (id < 1 || id > count)
                bad_file(path, "node ids must be 1.." + std::to_string(count));
            if (seen[id - 1]++) bad_file(path, "duplicate node id " + std::to_string(id));
            fields[id - 1] = node.at("b").get<double>();
        }

        std::vector<std::pair<int, int>> edge_list;
        std::vector<double> couplings_by_pair;
        for (const Json& edge : j.at("edges")) {
            int a = edge.at("m").get<int>();
            int b = edge.at("n").get<int>();
            if (a < 1 || a > count || b < 1 || b > count)
                bad_file(path, "edge references an unknown node id");
            edge_list.emplace_back(a - 1, b - 1);
            couplings_by_pair.push_back(edge.at("c").get<double>());
        }

        GraphTopology topo(count, edge_list);
        if (!topo.connected())
            throw Error("invalid_network", "network graph is not connected");
        // Couplings arrive in file order; realign with the canonical edge order.
        std::vector<double> couplings(topo.edges().size(), 0.0);
        for (std::size_t e = 0; e < edge_list.size(); ++e) {
            int idx = topo.edge_index(edge_list[e].first, edge_list[e].second);
            couplings[static_cast<std::size_t>(idx)] = couplings_by_pair[e];
        }

        NetworkFile out;
        out.network = SpinNetwork::checked(std::move(topo), std::move(couplings),
                                           std::move(fields), delta, conv);
        if (j.contains("gateway"))
            out.gateway = gateway_from_ids(j.at("gateway"), count, path);
        return out;
    } catch (const nlohmann::json::exception& e) {
        bad_file(path, e.what());
    }
}

NetworkFile read_network_file(const std::string& path) {
    try {
        return network_from_json(read_json_file(path));
    } catch (const Error& e) {
        if (std::string(e.kind()) == "parse_error" || std::string(e.kind()) == "invalid_network")
            throw;
        throw Error(e.kind(), path + ": " + e.what());
    }
}

void write_network_file(const std::string& path, const SpinNetwork& net,
                        const std::vector<int>& gateway) {
    write_json_file(path, network_to_json(net, gateway));
}

void write_dataset_csv(const std::string& path, const TomographyDataset& data) {
    std::ofstream out(path);
    if (!out) throw Error("parse_error", path + ": cannot open for writing");
    out << "n0,n,t,re,im\n";
    for (const Signal& s : data.signals)
        for (std::size_t k = 0; k < s.times.size(); ++k)
            out << (s.initial_site + 1) << "," << (s.site + 1) << "," << fmt17(s.times[k])
                << "," << fmt17(s.values[k].real()) << "," << fmt17(s.values[k].imag())
                << "\n";
    if (!out) throw Error("parse_error", path + ": write failed");

    Json meta;
    meta["version"] = 1;
    meta["shots"] = data.shots;
    meta["seed"] = data.rng_seed;
    meta["dt"] = data.dt;
    meta["radius_bound"] = data.radius_bound;
    meta["signals"] = data.signals.size();
    meta["samples_per_signal"] =
        data.signals.empty() ? 0 : data.signals.front().times.size();
    write_json_file(meta_path(path), meta);
}

TomographyDataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("parse_error", path + ": cannot open");
    std::string line;
    if (!std::getline(in, line) || line != "n0,n,t,re,im")
        bad_file(path, "missing or unexpected header row");

    TomographyDataset out;
    std::map<std::pair<int, int>, std::size_t> index;  // (n0, n) -> signal slot
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        double vals[5];
        for (int c = 0; c < 5; ++c) {
            if (!std::getline(row, cell, c == 4 ? '\n' : ','))
                bad_file(path, "line " + std::to_string(lineno) + ": expected 5 columns");
            try {
                std::size_t used = 0;
                vals[c] = std::stod(cell, &used);
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                bad_file(path, "line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        int n0 = static_cast<int>(vals[0]), n = static_cast<int>(vals[1]);
        if (n0 < 1 || n < 1)
            bad_file(path, "line " + std::to_string(lineno) + ": sites are 1-based");
        auto key = std::make_pair(n0 - 1, n - 1);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.signals.size()).first;
            Signal s;
            s.initial_site = n0 - 1;
            s.site = n - 1;
            out.signals.push_back(std::move(s));
        }
        Signal& s = out.signals[it->second];
        s.times.push_back(vals[2]);
        s.values.emplace_back(vals[3], vals[4]);
    }
    if (out.signals.empty()) bad_file(path, "no data rows");

    std::ifstream meta_in(meta_path(path));
    if (meta_in) {
        Json meta = read_json_file(meta_path(path));
        try {
            out.shots = meta.value("shots", 0L);
            out.rng_seed = meta.value("seed", std::uint64_t{0});
            out.dt = meta.value("dt", 0.0);
            out.radius_bound = meta.value("radius_bound", 0.0);
        } catch (const nlohmann::json::exception& e) {
            bad_file(meta_path(path), e.what());
        }
    }
    return out;
}

Json eigendata_to_json(const EigendataEstimate& est) {
    Json j;
    j["version"] = 1;
    j["frequencies"] = est.frequencies;
    Json comp = Json::object();
    for (std::size_t r = 0; r < est.gateway.size(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < est.components.cols(); ++c)
            row.push_back(est.components(static_cast<int>(r), c));
        comp[std::to_string(est.gateway[r] + 1)] = std::move(row);
    }
    j["gateway_components"] = std::move(comp);
    Json diag;
    diag["line_count"] = est.diagnostics.line_count;
    diag["max_imag_residue"] = est.diagnostics.max_imag_residue;
    diag["max_rank1_inconsistency"] = est.diagnostics.max_rank1_inconsistency;
    diag["max_amplitude_residual"] = est.diagnostics.max_amplitude_residual;
    diag["warnings"] = est.diagnostics.warnings;
    j["diagnostics"] = std::move(diag);
    return j;
}

EigendataEstimate eigendata_from_json(const Json& j) {
    const std::string path = "eigendata";
    try {
        if (j.value("version", 1) != 1) bad_file(path, "unsupported version");
        EigendataEstimate est;
        est.frequencies = j.at("frequencies").get<std::vector<double>>();
        const Json& comp = j.at("gateway_components");
        if (!comp.is_object() || comp.empty())
            bad_file(path, "gateway_components must map node ids to rows");
        for (const auto& [key, row] : comp.items()) {
            int id = 0;
            try {
                std::size_t used = 0;
                id = std::stoi(key, &used);
                if (used != key.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                bad_file(path, "gateway_components key '" + key + "' is not a node id");
            }
            if (id < 1) bad_file(path, "node ids are 1-based");
            if (row.size() != est.frequencies.size())
                bad_file(path, "component row length must match the frequency count");
            est.gateway.push_back(id - 1);
        }
        std::sort(est.gateway.begin(), est.gateway.end());
        if (std::adjacent_find(est.gateway.begin(), est.gateway.end()) != est.gateway.end())
            bad_file(path, "duplicate gateway node id");
        est.components.resize(static_cast<int>(est.gateway.size()),
                              static_cast<int>(est.frequencies.size()));
        for (std::size_t r = 0; r < est.gateway.size(); ++r) {
            const Json& row = comp.at(std::to_string(est.gateway[r] + 1));
            for (std::size_t c = 0; c < row.size(); ++c)
                est.components(static_cast<int>(r), static_cast<int>(c)) =
                    row[c].get<double>();
        }
        if (j.contains("diagnostics")) {
            const Json& d = j.at("diagnostics");
            est.diagnostics.line_count = d.value("line_count", 0);
            est.diagnostics.max_imag_residue = d.value("max_imag_residue", 0.0);
            est.diagnostics.max_rank1_inconsistency = d.value("max_rank1_inconsistency", 0.0);
            est.diagnostics.max_amplitude_residual = d.value("max_amplitude_residual", 0.0);
        }
        if (est.diagnostics.line_count == 0)
            est.diagnostics.line_count = static_cast<int>(est.frequencies.size());
        return est;
    } catch (const nlohmann::json::exception& e) {
        bad_file(path, e.what());
    }
}

void write_eigendata_file(const std::string& path, const EigendataEstimate& est) {
    write_json_file(path, eigendata_to_json(est));
}

EigendataEstimate read_eigendata_file(const std::string& path) {
    return eigendata_from_json(read_json_file(path));
}

Json result_to_json(const ReconstructionResult& result) {
    Json j;
    j["version"] = 1;
    j["nodes"] = result.topology.node_count();
    Json edges = Json::array();
    for (std::size_t e = 0; e < result.topology.edges().size(); ++e) {
        const auto& [m, n] = result.topology.edges()[e];
        edges.push_back({{"m", m + 1},
                         {"n", n + 1},
                         {"J", result.edge_elements[e]},
                         {"c", result.edge_couplings[e]}});
    }
    j["edges"] = std::move(edges);
    Json fields = Json::array();
    for (int n = 0; n < result.fields.size(); ++n)
        fields.push_back({{"id", n + 1}, {"b", result.fields(n)}});
    j["fields"] = std::move(fields);
    j["ground_energy"] = result.ground_energy;
    j["energies"] = result.energies;
    Json seq = Json::array();
    for (const ForcingStep& s : result.sequence.steps)
        seq.push_back({{"infector", s.infector + 1}, {"forced", s.forced + 1}});
    j["sequence"] = std::move(seq);
    Json diag;
    diag["min_pivot"] = result.diagnostics.min_pivot;
    diag["pivot_magnitudes"] = result.diagnostics.pivot_magnitudes;
    diag["max_step_inconsistency"] = result.diagnostics.max_step_inconsistency;
    diag["max_nonedge_residual"] = result.diagnostics.max_nonedge_residual;
    diag["max_row_norm_residue"] = result.diagnostics.max_row_norm_residue;
    diag["trace_identity_mismatch"] = result.diagnostics.trace_identity_mismatch;
    diag["sign_violations"] = result.diagnostics.sign_violations;
    j["diagnostics"] = std::move(diag);
    return j;
}

Json lift_to_json(const LiftOutcome& outcome) {
    Json j;
    j["version"] = 1;
    Json ops = Json::array();
    for (const LiftOperator& op : outcome.operators) {
        Json block = Json::array();
        for (int r = 0; r < op.block.rows(); ++r) {
            Json row = Json::array();
            for (int c = 0; c < op.block.cols(); ++c) row.push_back(op.block(r, c));
            block.push_back(std::move(row));
        }
        ops.push_back({{"provenance", op.provenance}, {"scale", op.scale},
                       {"block", std::move(block)}});
    }
    j["operators"] = std::move(ops);
    Json total = Json::array();
    for (int r = 0; r < outcome.total_block.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < outcome.total_block.cols(); ++c)
            row.push_back(outcome.total_block(r, c));
        total.push_back(std::move(row));
    }
    j["total_block"] = std::move(total);
    j["min_gap_before"] = outcome.min_gap_before;
    j["min_gap_after"] = outcome.min_gap_after;
    j["iterations"] = outcome.iterations;
    j["max_split_deviation"] = outcome.max_split_deviation;
    return j;
}

namespace {

struct PlotRange {
    double lo = 0.0, hi = 1.0;
    void take(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double map(double v, double px_lo, double px_hi) const {
        double span = hi - lo;
        if (span <= 0.0) span = 1.0;
        return px_lo + (v - lo) / span * (px_hi - px_lo);
    }
};

}  // namespace

void write_signal_plot(const std::string& path, const TomographyDataset& data,
                       const EigendataEstimate* estimate) {
    if (data.signals.empty()) throw Error("invalid_config", "nothing to plot");
    std::ofstream out(path);
    if (!out) throw Error("parse_error", path + ": cannot open for writing");

    const int width = 960, height = 520;
    const double top_y0 = 30, top_y1 = 270, bot_y0 = 310, bot_y1 = 490;
    const double x0 = 60, x1 = width - 20;

    int family = data.signals.front().initial_site;
    std::vector<const Signal*> shown;
    for (const Signal& s : data.signals)
        if (s.initial_site == family) shown.push_back(&s);

    PlotRange tr, vr;
    for (const Signal* s : shown) {
        for (double t : s->times) tr.take(t);
        for (const auto& v : s->values) {
            vr.take(v.real());
            vr.take(v.imag());
        }
    }

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' viewBox='0 0 " << width << " " << height << "'>\n";
    out << "<rect width='" << width << "' height='" << height << "' fill='white'/>\n";
    out << "<text x='" << x0 << "' y='20' font-family='sans-serif' font-size='13'>"
        << "signals from site " << family + 1 << " (solid: re, dashed: im)</text>\n";

    const char* palette[] = {"#1b6ca8", "#c0392b", "#1e8449", "#7d3c98",
                             "#b7950b", "#148f77", "#884ea0", "#2e4053"};
    auto ty = [&](double v) { return top_y1 - (vr.map(v, 0, top_y1 - top_y0) - 0); };
    for (std::size_t i = 0; i < shown.size(); ++i) {
        const Signal* s = shown[i];
        const char* color = palette[i % 8];
        for (int part = 0; part < 2; ++part) {
            out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.2'";
            if (part == 1) out << " stroke-dasharray='5,4'";
            out << " points='";
            for (std::size_t k = 0; k < s->times.size(); ++k) {
                double v = part == 0 ? s->values[k].real() : s->values[k].imag();
                out << fmt17(tr.map(s->times[k], x0, x1)) << "," << fmt17(ty(v)) << " ";
            }
            out << "'/>\n";
        }
        out << "<text x='" << x1 - 120 << "' y='" << top_y0 + 16 * (double)i
            << "' font-family='sans-serif' font-size='11' fill='" << color << "'>site "
            << s->site + 1 << "</text>\n";
    }
    out << "<line x1='" << x0 << "' y1='" << ty(0.0) << "' x2='" << x1 << "' y2='" << ty(0.0)
        << "' stroke='#999' stroke-width='0.5'/>\n";

    if (estimate && !estimate->frequencies.empty()) {
        PlotRange fr, ar;
        fr.take(0.0);
        for (double f : estimate->frequencies) fr.take(f);
        double pad = 0.05 * (fr.hi - fr.lo + 1.0);
        fr.lo -= pad;
        fr.hi += pad;
        std::vector<double> weight(estimate->frequencies.size(), 0.0);
        for (std::size_t c = 0; c < estimate->frequencies.size(); ++c) {
            for (int r = 0; r < estimate->components.rows(); ++r)
                weight[c] += estimate->components(r, static_cast<int>(c)) *
                             estimate->components(r, static_cast<int>(c));
            ar.take(weight[c]);
        }
        out << "<text x='" << x0 << "' y='" << bot_y0 - 8
            << "' font-family='sans-serif' font-size='13'>recovered lines "
            << "(gateway weight per frequency)</text>\n";
        out << "<line x1='" << x0 << "' y1='" << bot_y1 << "' x2='" << x1 << "' y2='" << bot_y1
            << "' stroke='#333' stroke-width='1'/>\n";
        for (std::size_t c = 0; c < estimate->frequencies.size(); ++c) {
            double px = fr.map(estimate->frequencies[c], x0, x1);
            double h = ar.map(weight[c], 0, bot_y1 - bot_y0 - 10);
            out << "<line x1='" << fmt17(px) << "' y1='" << bot_y1 << "' x2='" << fmt17(px)
                << "' y2='" << fmt17(bot_y1 - h) << "' stroke='#1b6ca8' stroke-width='2'/>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw Error("parse_error", path + ": write failed");
}

}  // namespace spinid
