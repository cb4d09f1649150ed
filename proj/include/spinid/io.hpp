#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spinid/degeneracy.hpp"
#include "spinid/dynamics.hpp"
#include "spinid/model.hpp"
#include "spinid/reconstruct.hpp"
#include "spinid/spectral.hpp"

namespace spinid {

// Insertion-ordered JSON keeps all output files byte-stable run to run.
using Json = nlohmann::ordered_json;

// On-disk network description. Node ids are 1-based and contiguous; the
// gateway list is optional in the file.
struct NetworkFile {
    SpinNetwork network;
    std::vector<int> gateway;  // 0-based once loaded; empty if absent
};

NetworkFile read_network_file(const std::string& path);
Json network_to_json(const SpinNetwork& net, const std::vector<int>& gateway);
NetworkFile network_from_json(const Json& j);
void write_network_file(const std::string& path, const SpinNetwork& net,
                        const std::vector<int>& gateway);

// Time series go to CSV with columns n0,n,t,re,im (sites 1-based) plus a
// .meta.json sidecar carrying shots, seed and the sampling grid facts.
void write_dataset_csv(const std::string& path, const TomographyDataset& data);
TomographyDataset read_dataset_csv(const std::string& path);

Json eigendata_to_json(const EigendataEstimate& est);
EigendataEstimate eigendata_from_json(const Json& j);
void write_eigendata_file(const std::string& path, const EigendataEstimate& est);
EigendataEstimate read_eigendata_file(const std::string& path);

Json result_to_json(const ReconstructionResult& result);
Json lift_to_json(const LiftOutcome& outcome);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

// Two-panel SVG: measured quadratures of the first experiment family over
// time, and the recovered line spectrum as sticks when available.
void write_signal_plot(const std::string& path, const TomographyDataset& data,
                       const EigendataEstimate* estimate = nullptr);

}  // namespace spinid
