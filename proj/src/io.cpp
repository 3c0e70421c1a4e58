#include "streamlabel/io.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "streamlabel/errors.hpp"

namespace streamlabel {
namespace {

using json = nlohmann::json;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument("bad");
        return v;
    } catch (const std::exception&) {
        throw DataError(where + ": expected a finite number, got '" + text + "'");
    }
}

std::int64_t parse_int(const std::string& text, const std::string& where) {
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw DataError(where + ": expected an integer, got '" + text + "'");
    }
    return v;
}

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct ConfigField {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, ConfigField>>& fields() {
    auto as_int = [](const std::string& v, const std::string& key) {
        return static_cast<int>(parse_int(v, "config key " + key));
    };
    auto as_double = [](const std::string& v, const std::string& key) {
        return parse_double(v, "config key " + key);
    };
    auto as_bool = [](const std::string& v, const std::string& key) {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        throw DataError("config key " + key + ": expected true/false, got '" + v + "'");
    };
#define SL_INT(key, member)                                                                   \
    {key, {[=](RunConfig& c, const std::string& v) { c.member = as_int(v, key); },            \
           [](const RunConfig& c) { return std::to_string(c.member); }}}
#define SL_DOUBLE(key, member)                                                                \
    {key, {[=](RunConfig& c, const std::string& v) { c.member = as_double(v, key); },         \
           [](const RunConfig& c) { return fmt_double(c.member); }}}
    static const std::vector<std::pair<std::string, ConfigField>> table = {
        SL_INT("num_hf", engine.ensemble.num_hf),
        SL_INT("k_per_hf", engine.ensemble.k_per_hf),
        SL_DOUBLE("tau", engine.ensemble.tau),
        SL_DOUBLE("lambda", engine.ensemble.lambda),
        SL_DOUBLE("slack", engine.ensemble.slack),
        SL_INT("max_iters", engine.ensemble.max_iters),
        {"bootstrap",
         {[=](RunConfig& c, const std::string& v) { c.engine.ensemble.bootstrap = as_bool(v, "bootstrap"); },
          [](const RunConfig& c) { return std::string(c.engine.ensemble.bootstrap ? "true" : "false"); }}},
        SL_INT("q", engine.adaptation.q),
        SL_INT("min_cohort", engine.adaptation.min_cohort),
        SL_INT("check_period", engine.adaptation.check_period),
        SL_INT("max_prototypes", engine.adaptation.max_prototypes),
        SL_INT("new_label_k", engine.adaptation.new_label_k),
        SL_INT("ttl_chunks", engine.adaptation.ttl_chunks),
        SL_INT("chunk_size", chunk_size),
        SL_DOUBLE("known_label_fraction", known_label_fraction),
        SL_DOUBLE("dl_du_ratio", dl_du_ratio),
        {"seed",
         {[](RunConfig& c, const std::string& v) {
              c.seed = static_cast<std::uint64_t>(parse_int(v, "config key seed"));
              c.engine.ensemble.seed = c.seed;
          },
          [](const RunConfig& c) { return std::to_string(c.seed); }}},
    };
#undef SL_INT
#undef SL_DOUBLE
    return table;
}

}  // namespace

void RunConfig::validate() const {
    engine.validate();
    if (chunk_size <= 0) throw ConfigError("chunk_size must be positive");
    if (!(known_label_fraction > 0.0 && known_label_fraction <= 1.0)) {
        throw ConfigError("known_label_fraction must lie in (0, 1]");
    }
    if (!(dl_du_ratio > 0.0)) throw ConfigError("dl_du_ratio must be positive");
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    for (const auto& [name, field] : fields()) {
        if (name == key) {
            try {
                field.set(cfg, trim(value));
            } catch (const DataError& e) {
                throw ConfigError(e.what());
            }
            return;
        }
    }
    throw ConfigError("unknown config key '" + key + "'");
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [name, field] : fields()) keys.push_back(name);
    return keys;
}

std::map<std::string, std::string> config_values(const RunConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& [name, field] : fields()) out[name] = field.get(cfg);
    return out;
}

RunConfig load_run_config(const std::string& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(e.filename() + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    RunConfig cfg;
    for (const auto& [key, node] : tree) {
        if (!node.empty()) throw ConfigError(path + ": sections are not supported ([" + key + "])");
        try {
            set_config_value(cfg, key, node.data());
        } catch (const ConfigError& e) {
            throw ConfigError(path + ": " + e.what());
        }
    }
    return cfg;
}

std::vector<Instance> read_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    const auto header = split_csv_line(trim(line));
    if (header.size() < 3 || trim(header.front()) != "id" || trim(header.back()) != "label") {
        throw DataError(path + ":1: header must be id,f0,...,f{d-1},label");
    }
    const std::size_t dim = header.size() - 2;
    for (std::size_t j = 0; j < dim; ++j) {
        if (trim(header[j + 1]) != "f" + std::to_string(j)) {
            throw DataError(path + ":1: expected column f" + std::to_string(j));
        }
    }
    std::vector<Instance> rows;
    std::set<std::int64_t> seen_ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto cols = split_csv_line(line);
        if (cols.size() != dim + 2) {
            throw DataError(where + ": expected " + std::to_string(dim + 2) + " fields, got " +
                            std::to_string(cols.size()));
        }
        Instance inst;
        inst.id = parse_int(trim(cols[0]), where);
        if (!seen_ids.insert(inst.id).second) throw DataError(where + ": duplicate id " + std::to_string(inst.id));
        inst.features.reserve(dim);
        for (std::size_t j = 0; j < dim; ++j) inst.features.push_back(parse_double(trim(cols[j + 1]), where));
        const auto label = trim(cols.back());
        if (!label.empty()) inst.true_label = static_cast<LabelId>(parse_int(label, where));
        inst.arrival_index = static_cast<std::int64_t>(rows.size());
        rows.push_back(std::move(inst));
    }
    return rows;
}

void write_dataset(const std::vector<Instance>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset " + path);
    const std::size_t dim = rows.empty() ? 0 : rows.front().features.size();
    out << "id";
    for (std::size_t j = 0; j < dim; ++j) out << ",f" << j;
    out << ",label\n";
    for (const auto& r : rows) {
        out << r.id;
        for (double v : r.features) out << "," << fmt_double(v);
        out << ",";
        if (r.true_label) out << *r.true_label;
        out << "\n";
    }
}

std::string decision_to_json(const LabelDecision& d) {
    json j;
    j["id"] = d.instance_id;
    j["chunk"] = d.chunk;
    j["outcome"] = to_string(d.outcome);
    if (d.outcome == Outcome::Assigned) j["label"] = d.label;
    else j["label"] = nullptr;
    j["score"] = d.score;
    j["retroactive"] = d.retroactive;
    return j.dump();
}

LabelDecision decision_from_json(const std::string& line) {
    LabelDecision d;
    try {
        const auto j = json::parse(line);
        d.instance_id = j.at("id").get<std::int64_t>();
        d.chunk = j.at("chunk").get<std::int64_t>();
        const auto outcome = j.at("outcome").get<std::string>();
        if (outcome == "assigned") d.outcome = Outcome::Assigned;
        else if (outcome == "deferred") d.outcome = Outcome::Deferred;
        else throw DataError("unknown outcome '" + outcome + "'");
        if (!j.at("label").is_null()) d.label = j.at("label").get<LabelId>();
        d.score = j.at("score").get<double>();
        d.retroactive = j.at("retroactive").get<bool>();
    } catch (const json::exception& e) {
        throw DataError(std::string("decision record: ") + e.what());
    }
    return d;
}

void write_decisions(const std::vector<LabelDecision>& decisions, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& d : decisions) out << decision_to_json(d) << "\n";
}

std::vector<LabelDecision> read_decisions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open decision log " + path);
    std::vector<LabelDecision> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(decision_from_json(line));
        } catch (const DataError& e) {
            throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_truth(const std::vector<Instance>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "id,label\n";
    for (const auto& r : rows) {
        if (r.true_label) out << r.id << "," << *r.true_label << "\n";
    }
}

std::map<std::int64_t, LabelId> read_truth(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open ground truth " + path);
    std::map<std::int64_t, LabelId> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || (line_no == 1 && line == "id,label")) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        const auto cols = split_csv_line(line);
        if (cols.size() != 2) throw DataError(where + ": expected id,label");
        out[parse_int(trim(cols[0]), where)] = static_cast<LabelId>(parse_int(trim(cols[1]), where));
    }
    return out;
}

}  // namespace streamlabel
