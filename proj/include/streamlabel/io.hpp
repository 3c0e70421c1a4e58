#ifndef STREAMLABEL_IO_HPP
#define STREAMLABEL_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "streamlabel/adaptation.hpp"
#include "streamlabel/core.hpp"

namespace streamlabel {

// Everything a labeling run needs besides data. Defaults: 6 heuristic
// functions of 40 prototypes, tau 0.7, chunks of 20, 20% of labels known,
// |D_L| / |D_U| = 0.1.
struct RunConfig {
    EngineConfig engine;
    int chunk_size = 20;
    double known_label_fraction = 0.20;
    double dl_du_ratio = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

// Key = value file; unknown keys are rejected.
RunConfig load_run_config(const std::string& path);
// Applies one `key=value` override.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();
std::map<std::string, std::string> config_values(const RunConfig& cfg);

// CSV with header `id,f0,...,f{d-1},label`; an empty label field means unlabeled.
std::vector<Instance> read_dataset(const std::string& path);
void write_dataset(const std::vector<Instance>& rows, const std::string& path);

// JSON lines: {"id","chunk","outcome","label","score","retroactive"}.
std::string decision_to_json(const LabelDecision& d);
LabelDecision decision_from_json(const std::string& line);
void write_decisions(const std::vector<LabelDecision>& decisions, const std::string& path);
std::vector<LabelDecision> read_decisions(const std::string& path);

// `id,label` ground-truth file.
void write_truth(const std::vector<Instance>& rows, const std::string& path);
std::map<std::int64_t, LabelId> read_truth(const std::string& path);

}  // namespace streamlabel

#endif  // STREAMLABEL_IO_HPP
