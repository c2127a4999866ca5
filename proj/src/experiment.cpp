#include "qcaan/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

namespace qcaan {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw Error("config: '" + where + "' must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
            throw Error("config: unknown key '" + it.key() + "' in " + where);
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception& e) {
        throw Error(std::string("config: bad value for '") + key + "': " + e.what());
    }
}

void read_adam(const json& j, AdamConfig& a) {
    check_keys(j, {"lr", "beta1", "beta2", "eps"}, "adam");
    read(j, "lr", a.lr);
    read(j, "beta1", a.beta1);
    read(j, "beta2", a.beta2);
    read(j, "eps", a.eps);
}

json adam_json(const AdamConfig& a) {
    return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

DatasetEntry read_dataset(const json& j, const fs::path& base) {
    DatasetEntry d;
    if (j.is_string()) {
        d.path = j.get<std::string>();
    } else {
        check_keys(j, {"name", "path", "label_column", "positive_label", "delimiter"}, "dataset");
        read(j, "name", d.name);
        read(j, "path", d.path);
        read(j, "label_column", d.label_column);
        read(j, "positive_label", d.positive_label);
        std::string delim(1, d.delimiter);
        read(j, "delimiter", delim);
        if (delim.size() != 1) throw Error("config: dataset delimiter must be a single character");
        d.delimiter = delim[0];
    }
    if (d.path.empty()) throw Error("config: dataset entry without a path");
    fs::path p(d.path);
    if (p.is_relative()) p = base / p;
    d.path = p.lexically_normal().string();
    if (d.name.empty()) d.name = fs::path(d.path).stem().string();
    return d;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "missing";
    std::ostringstream ss;
    ss << in.rdbuf();
    return hex64(fnv1a(ss.str()));
}

/// For hashing, a dataset is identified by its file contents rather than where it lives.
json dataset_json(const DatasetEntry& d, bool for_hash = false) {
    return {{"name", d.name},
            {for_hash ? "content" : "path", for_hash ? file_digest(d.path) : d.path},
            {"label_column", d.label_column},
            {"positive_label", d.positive_label},
            {"delimiter", std::string(1, d.delimiter)}};
}

/// Feature count from the catalog when the name is known, else from the file header.
std::optional<std::size_t> feature_count(const DatasetEntry& d) {
    if (const auto* e = find_catalog_entry(d.name)) return e->f;
    std::ifstream in(d.path);
    std::string line;
    if (!in || !std::getline(in, line)) return std::nullopt;
    const auto cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), d.delimiter)) + 1;
    return cols - 1;
}

std::string sanitize(std::string s) {
    for (auto& c : s)
        if (c == ',' || c == '\n' || c == '\r' || c == '"') c = c == ',' ? ';' : ' ';
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_double(const std::string& s) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    return std::stod(s);
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

std::string report_cells(const ClassificationReport& r) {
    std::ostringstream os;
    os << r.tn << ',' << r.fp << ',' << r.fn << ',' << r.tp << ',' << format_double(r.accuracy) << ','
       << format_double(r.precision) << ',' << format_double(r.recall) << ',' << format_double(r.auc);
    return os.str();
}

const char* kReportHeader = "tn,fp,fn,tp,accuracy,precision,recall,auc";

TabularDataset load_scaled(const DatasetEntry& d) {
    auto ds = load_dataset(d.path, {d.label_column, d.positive_label, d.delimiter});
    ds.name = d.name;
    return minmax_scale(ds);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (q < 1) throw Error("config: q must be at least 1");
    if (seeds.empty()) throw Error("config: at least one seed is required");
    if (strategies.empty()) throw Error("config: at least one strategy is required");
    if (qcbm_layers < 0) throw Error("config: qcbm_layers must be non-negative");
    if (!(train_fraction > 0 && train_fraction < 1)) throw Error("config: train_fraction must lie in (0, 1)");
    if (!(target_ratio > 0)) throw Error("config: target_ratio must be positive");
    if (smote_k < 1) throw Error("config: smote_k must be at least 1");
    if (gan.refresh_period < 1) throw Error("config: gan.refresh_period must be at least 1");
    if (gan.epochs < 0) throw Error("config: gan.epochs must be non-negative");
    if (gan.batch_size < 1) throw Error("config: gan.batch_size must be positive");
    const bool quantum = std::find(strategies.begin(), strategies.end(), StrategyKind::qcaan) != strategies.end();
    if (quantum && q > kMaxSimulatedQubits)
        throw Error("config: q=" + std::to_string(q) + " exceeds the simulator limit of " +
                    std::to_string(kMaxSimulatedQubits));
    std::set<std::string> names;
    for (const auto& d : datasets)
        if (!names.insert(d.name).second) throw Error("config: duplicate dataset name '" + d.name + "'");
    std::set<StrategyKind> kinds(strategies.begin(), strategies.end());
    if (kinds.size() != strategies.size()) throw Error("config: duplicate strategy");
    std::set<std::uint64_t> s(seeds.begin(), seeds.end());
    if (s.size() != seeds.size()) throw Error("config: duplicate seed");
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(std::string("config: invalid JSON: ") + e.what());
    }
    check_keys(j,
               {"output_dir", "datasets", "strategies", "seeds", "q", "qcbm_layers", "min_features", "train_fraction",
                "metadata_row_cap", "split_seed", "smote_k", "target_ratio", "threshold", "workers", "logistic", "gan",
                "mlp", "exp2", "analysis"},
               "config");
    const fs::path base(base_dir);
    ExperimentConfig c;
    read(j, "output_dir", c.output_dir);
    if (auto it = j.find("datasets"); it != j.end()) {
        if (!it->is_array()) throw Error("config: 'datasets' must be an array");
        for (const auto& d : *it) c.datasets.push_back(read_dataset(d, base));
    }
    if (auto it = j.find("strategies"); it != j.end()) {
        c.strategies.clear();
        for (const auto& s : *it) c.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    read(j, "seeds", c.seeds);
    read(j, "q", c.q);
    read(j, "qcbm_layers", c.qcbm_layers);
    read(j, "min_features", c.min_features);
    read(j, "train_fraction", c.train_fraction);
    read(j, "metadata_row_cap", c.metadata_row_cap);
    read(j, "split_seed", c.split_seed);
    read(j, "smote_k", c.smote_k);
    read(j, "target_ratio", c.target_ratio);
    read(j, "threshold", c.threshold);
    read(j, "workers", c.workers);
    if (auto it = j.find("logistic"); it != j.end()) {
        check_keys(*it, {"l2", "max_iters", "tol"}, "logistic");
        read(*it, "l2", c.logistic.l2);
        read(*it, "max_iters", c.logistic.max_iters);
        read(*it, "tol", c.logistic.tol);
    }
    if (auto it = j.find("gan"); it != j.end()) {
        const json& g = *it;
        check_keys(g,
                   {"epochs", "batch_size", "refresh_period", "qcbm_iters", "d_steps", "g_steps", "architecture_rule",
                    "adam", "qcbm"},
                   "gan");
        read(g, "epochs", c.gan.epochs);
        read(g, "batch_size", c.gan.batch_size);
        read(g, "refresh_period", c.gan.refresh_period);
        read(g, "qcbm_iters", c.gan.qcbm_iters);
        read(g, "d_steps", c.gan.d_steps);
        read(g, "g_steps", c.gan.g_steps);
        if (auto r = g.find("architecture_rule"); r != g.end())
            c.gan.rule = architecture_rule_from_string(r->get<std::string>());
        if (auto a = g.find("adam"); a != g.end()) read_adam(*a, c.gan.adam);
        if (auto qj = g.find("qcbm"); qj != g.end()) {
            check_keys(*qj, {"batch", "epsilon", "sinkhorn_max_iters", "spsa"}, "qcbm");
            read(*qj, "batch", c.gan.qcbm.batch);
            read(*qj, "epsilon", c.gan.qcbm.epsilon);
            read(*qj, "sinkhorn_max_iters", c.gan.qcbm.sinkhorn_max_iters);
            if (auto s = qj->find("spsa"); s != qj->end()) {
                check_keys(*s, {"a", "c", "big_a", "alpha", "gamma"}, "spsa");
                read(*s, "a", c.gan.qcbm.gains.a);
                read(*s, "c", c.gan.qcbm.gains.c);
                read(*s, "big_a", c.gan.qcbm.gains.big_a);
                read(*s, "alpha", c.gan.qcbm.gains.alpha);
                read(*s, "gamma", c.gan.qcbm.gains.gamma);
            }
        }
    }
    if (auto it = j.find("mlp"); it != j.end()) {
        check_keys(*it, {"epochs", "batch_size", "adam"}, "mlp");
        read(*it, "epochs", c.mlp.epochs);
        read(*it, "batch_size", c.mlp.batch_size);
        if (auto a = it->find("adam"); a != it->end()) read_adam(*a, c.mlp.adam);
    }
    if (auto it = j.find("exp2"); it != j.end()) {
        check_keys(*it, {"dataset", "distinguish_samples", "seed"}, "exp2");
        if (auto d = it->find("dataset"); d != it->end()) c.exp2.dataset = read_dataset(*d, base);
        read(*it, "distinguish_samples", c.exp2.distinguish_samples);
        read(*it, "seed", c.exp2.seed);
    }
    if (auto it = j.find("analysis"); it != j.end()) {
        const json& a = *it;
        check_keys(a,
                   {"replications", "hdi_mass", "p_adjust", "gbt", "importance_repeats", "cp_grid", "candidate",
                    "baseline", "seed"},
                   "analysis");
        read(a, "replications", c.analysis.replications);
        read(a, "hdi_mass", c.analysis.hdi_mass);
        if (auto p = a.find("p_adjust"); p != a.end())
            c.analysis.p_adjust = stats::p_adjust_from_string(p->get<std::string>());
        if (auto g = a.find("gbt"); g != a.end()) {
            check_keys(*g, {"rounds", "max_depth", "learning_rate"}, "gbt");
            read(*g, "rounds", c.analysis.gbt.rounds);
            read(*g, "max_depth", c.analysis.gbt.max_depth);
            read(*g, "learning_rate", c.analysis.gbt.learning_rate);
        }
        read(a, "importance_repeats", c.analysis.importance_repeats);
        read(a, "cp_grid", c.analysis.cp_grid);
        read(a, "candidate", c.analysis.candidate);
        read(a, "baseline", c.analysis.baseline);
        read(a, "seed", c.analysis.seed);
    }

    fs::path out(c.output_dir);
    if (out.is_relative()) {
        const char* root = std::getenv("QCAAN_OUTPUT_ROOT");
        out = (root && *root) ? fs::path(root) / out : base / out;
    }
    c.output_dir = out.lexically_normal().string();

    std::vector<DatasetEntry> kept;
    for (auto& d : c.datasets) {
        const auto f = feature_count(d);
        if (f && *f < c.min_features)
            c.filtered_out.emplace_back(d.name, "f=" + std::to_string(*f) + " < " + std::to_string(c.min_features));
        else
            kept.push_back(std::move(d));
    }
    c.datasets = std::move(kept);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), fs::absolute(path).parent_path().string());
}

namespace {

json config_tree(const ExperimentConfig& c, bool for_hash) {
    json j;
    j["datasets"] = json::array();
    for (const auto& d : c.datasets) j["datasets"].push_back(dataset_json(d, for_hash));
    j["strategies"] = json::array();
    for (auto s : c.strategies) j["strategies"].push_back(to_string(s));
    j["seeds"] = c.seeds;
    j["q"] = c.q;
    j["qcbm_layers"] = c.qcbm_layers;
    j["min_features"] = c.min_features;
    j["train_fraction"] = c.train_fraction;
    j["metadata_row_cap"] = c.metadata_row_cap;
    j["split_seed"] = c.split_seed;
    j["smote_k"] = c.smote_k;
    j["target_ratio"] = c.target_ratio;
    j["threshold"] = c.threshold;
    j["logistic"] = {{"l2", c.logistic.l2}, {"max_iters", c.logistic.max_iters}, {"tol", c.logistic.tol}};
    const auto& g = c.gan.qcbm.gains;
    j["gan"] = {{"epochs", c.gan.epochs},
                {"batch_size", c.gan.batch_size},
                {"refresh_period", c.gan.refresh_period},
                {"qcbm_iters", c.gan.qcbm_iters},
                {"d_steps", c.gan.d_steps},
                {"g_steps", c.gan.g_steps},
                {"architecture_rule", to_string(c.gan.rule)},
                {"adam", adam_json(c.gan.adam)},
                {"qcbm",
                 {{"batch", c.gan.qcbm.batch},
                  {"epsilon", c.gan.qcbm.epsilon},
                  {"sinkhorn_max_iters", c.gan.qcbm.sinkhorn_max_iters},
                  {"spsa", {{"a", g.a}, {"c", g.c}, {"big_a", g.big_a}, {"alpha", g.alpha}, {"gamma", g.gamma}}}}}};
    j["mlp"] = {{"epochs", c.mlp.epochs}, {"batch_size", c.mlp.batch_size}, {"adam", adam_json(c.mlp.adam)}};
    j["exp2"] = {{"dataset", c.exp2.dataset.path.empty() ? json(nullptr) : dataset_json(c.exp2.dataset, for_hash)},
                 {"distinguish_samples", c.exp2.distinguish_samples},
                 {"seed", c.exp2.seed}};
    const auto& a = c.analysis;
    j["analysis"] = {{"replications", a.replications},
                     {"hdi_mass", a.hdi_mass},
                     {"p_adjust", stats::to_string(a.p_adjust)},
                     {"gbt", {{"rounds", a.gbt.rounds}, {"max_depth", a.gbt.max_depth}, {"learning_rate", a.gbt.learning_rate}}},
                     {"importance_repeats", a.importance_repeats},
                     {"cp_grid", a.cp_grid},
                     {"candidate", a.candidate},
                     {"baseline", a.baseline},
                     {"seed", a.seed}};
    return j;
}

}  // namespace

std::string config_json(const ExperimentConfig& config) { return config_tree(config, false).dump(2); }

std::string config_hash(const ExperimentConfig& config) { return hex64(fnv1a(config_tree(config, true).dump())); }

// ---------------------------------------------------------------------------------------------
// Result store

std::string ExperimentRecord::key() const { return dataset + "|" + strategy + "|" + std::to_string(seed); }

bool ExperimentResult::complete() const {
    return std::all_of(records.begin(), records.end(), [](const ExperimentRecord& r) { return r.status == "ok"; });
}

std::string record_csv_header() {
    return std::string("dataset,strategy,seed,status,") + kReportHeader +
           ",threshold,precision_undefined,recall_undefined,n_train,n_synthetic,test_hash,audit_passed,"
           "architecture_rule,q,qcbm_layers,refresh_period,qcbm_iters,qcbm_batch,sinkhorn_epsilon,gan_epochs,"
           "smote_k,target_ratio,logistic_l2,config_hash,message";
}

std::string record_csv_row(const ExperimentRecord& r, const ExperimentConfig& c) {
    std::ostringstream os;
    os << r.dataset << ',' << r.strategy << ',' << r.seed << ',' << r.status << ',' << report_cells(r.report) << ','
       << format_double(r.report.threshold) << ',' << r.report.precision_undefined << ','
       << r.report.recall_undefined << ',' << r.n_train << ',' << r.n_synthetic << ',' << r.test_hash << ','
       << r.audit_passed << ',' << to_string(c.gan.rule) << ',' << c.q << ',' << c.qcbm_layers << ','
       << c.gan.refresh_period << ',' << c.gan.qcbm_iters << ',' << c.gan.qcbm.batch << ','
       << format_double(c.gan.qcbm.epsilon) << ',' << c.gan.epochs << ',' << c.smote_k << ','
       << format_double(c.target_ratio) << ',' << format_double(c.logistic.l2) << ',' << r.config_hash << ','
       << sanitize(r.message);
    return os.str();
}

std::vector<ExperimentRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open results file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != record_csv_header())
        throw Error("results file has an unexpected header: " + path);
    const auto width = split_csv(record_csv_header()).size();
    std::vector<ExperimentRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto c = split_csv(line);
        if (c.size() != width) continue;  // torn trailing line from an interrupted run
        ExperimentRecord r;
        try {
            r.dataset = c[0];
            r.strategy = c[1];
            r.seed = std::stoull(c[2]);
            r.status = c[3];
            r.report.tn = std::stol(c[4]);
            r.report.fp = std::stol(c[5]);
            r.report.fn = std::stol(c[6]);
            r.report.tp = std::stol(c[7]);
            r.report.accuracy = to_double(c[8]);
            r.report.precision = to_double(c[9]);
            r.report.recall = to_double(c[10]);
            r.report.auc = to_double(c[11]);
            r.report.threshold = to_double(c[12]);
            r.report.precision_undefined = c[13] == "1";
            r.report.recall_undefined = c[14] == "1";
            r.n_train = std::stoull(c[15]);
            r.n_synthetic = std::stoull(c[16]);
            r.test_hash = c[17];
            r.audit_passed = c[18] == "1";
            r.config_hash = c[30];
            r.message = c[31];
        } catch (const std::exception&) {
            continue;
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Experiment 1

namespace {

struct LoadedDataset {
    std::optional<TabularDataset> data;
    std::string error;
};

struct UnitOutput {
    std::vector<ExperimentRecord> records;
    std::vector<std::pair<std::string, std::string>> files;  // relative path, content
};

std::string file_stem(const std::string& dataset, const std::string& kind, std::uint64_t seed) {
    return dataset + "__" + kind + "__seed" + std::to_string(seed);
}

UnitOutput run_unit(const ExperimentConfig& c, const std::string& hash, const DatasetEntry& entry,
                    const LoadedDataset& loaded, std::uint64_t seed, const std::vector<StrategyKind>& pending) {
    UnitOutput out;
    auto fail_all = [&](const std::string& why) {
        for (auto k : pending) {
            ExperimentRecord r;
            r.dataset = entry.name;
            r.strategy = to_string(k);
            r.seed = seed;
            r.status = "error";
            r.config_hash = hash;
            r.message = why;
            out.records.push_back(std::move(r));
        }
    };
    if (!loaded.data) {
        fail_all(loaded.error);
        return out;
    }
    const TabularDataset& ds = *loaded.data;
    std::optional<TrainTestSplit> split;
    try {
        split = train_test_split(ds, c.train_fraction, derive_seed(c.split_seed, entry.name));
    } catch (const std::exception& e) {
        fail_all(e.what());
        return out;
    }
    const std::string test_hash = hex64(dataset_hash(split->test));
    const std::uint64_t base = derive_seed(derive_seed(seed, entry.name), "cell");

    for (auto kind : pending) {
        const auto t0 = std::chrono::steady_clock::now();
        ExperimentRecord r;
        r.dataset = entry.name;
        r.strategy = to_string(kind);
        r.seed = seed;
        r.config_hash = hash;
        r.test_hash = test_hash;
        try {
            AugmentationStrategy strategy{kind, c.smote_k, c.target_ratio, nullptr};
            if (is_generative(kind)) {
                const Matrix minority = split->train.class_rows(1);
                NoiseSource noise = NoiseSource::gaussian(c.q);
                if (kind == StrategyKind::qcaan) {
                    auto ansatz = make_ansatz(c.q, c.qcbm_layers);
                    auto params = random_params(ansatz, derive_seed(base, "qcbm-init"));
                    noise = NoiseSource::qcbm(std::move(ansatz), std::move(params));
                }
                QcAanConfig gc = c.gan;
                gc.simple = false;
                gc.seed = derive_seed(base, "aan:" + r.strategy);
                auto model = std::make_shared<TrainedGenerator>(train_aan(minority, std::move(noise), gc));
                const std::string stem = "histories/" + file_stem(entry.name, r.strategy, seed);
                out.files.emplace_back(stem + ".csv", history_csv(*model));
                if (kind == StrategyKind::qcaan) {
                    out.files.emplace_back(stem + "_qcbm.csv", qcbm_history_csv(*model));
                    out.files.emplace_back(stem + "_params.json",
                                           params_json(model->noise.ansatz(), model->noise.params()));
                }
                strategy.model = std::move(model);
            }
            const TabularDataset augmented = apply_strategy(*split, strategy, derive_seed(base, "augment:" + r.strategy));
            r.n_train = augmented.rows();
            r.n_synthetic = augmented.rows() - split->train.rows();
            const auto audit = audit_test_isolation(*split, augmented);
            r.audit_passed = audit.passed;
            if (!audit.passed) throw Error("test-isolation audit failed");
            const auto model = fit_logistic(augmented.features, augmented.labels, c.logistic);
            r.report = evaluate(split->test.labels, to_std(predict_proba(model, split->test.features)), c.threshold);
            if (!model.converged) r.message = "logistic regression hit the iteration cap";
        } catch (const std::exception& e) {
            r.status = "error";
            r.message = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.records.push_back(std::move(r));
    }
    return out;
}

}  // namespace

ExperimentResult run_experiment1(const ExperimentConfig& c) {
    c.validate();
    const fs::path root(c.output_dir);
    fs::create_directories(root / "histories");
    const std::string hash = config_hash(c);

    {
        json m;
        m["config_hash"] = hash;
        m["config"] = json::parse(config_json(c));
        m["filtered_out"] = json::array();
        for (const auto& [name, why] : c.filtered_out) m["filtered_out"].push_back({{"name", name}, {"reason", why}});
        m["files"] = {"cells.csv", "results.csv", "timings.csv", "histories/"};
        write_text(root / "manifest.json", m.dump(2) + "\n");
    }

    std::map<std::string, ExperimentRecord> done;
    const fs::path cells_path = root / "cells.csv";
    if (fs::exists(cells_path)) {
        try {
            for (auto& r : read_records_csv(cells_path.string()))
                if (r.config_hash == hash && r.status == "ok") done[r.key()] = std::move(r);
        } catch (const Error&) {
            fs::rename(cells_path, root / "cells.csv.stale");
        }
    }

    std::vector<LoadedDataset> loaded(c.datasets.size());
    for (std::size_t d = 0; d < c.datasets.size(); ++d) {
        try {
            loaded[d].data = load_scaled(c.datasets[d]);
        } catch (const std::exception& e) {
            loaded[d].error = e.what();
        }
    }

    struct Unit {
        std::size_t dataset;
        std::uint64_t seed;
        std::vector<StrategyKind> pending;
    };
    std::vector<Unit> units;
    ExperimentResult result;
    for (std::size_t d = 0; d < c.datasets.size(); ++d)
        for (auto seed : c.seeds) {
            Unit u{d, seed, {}};
            for (auto k : c.strategies) {
                ExperimentRecord probe;
                probe.dataset = c.datasets[d].name;
                probe.strategy = to_string(k);
                probe.seed = seed;
                if (done.count(probe.key()))
                    ++result.reused;
                else
                    u.pending.push_back(k);
            }
            if (!u.pending.empty()) units.push_back(std::move(u));
        }

    std::mutex store;
    const bool fresh = !fs::exists(cells_path);
    std::ofstream cells(cells_path, std::ios::app);
    if (fresh) cells << record_csv_header() << '\n';
    std::ofstream timings(root / "timings.csv", std::ios::app);
    if (timings.tellp() == 0) timings << "config_hash,dataset,strategy,seed,seconds\n";

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < units.size(); i = next++) {
            const auto& u = units[i];
            auto unit = run_unit(c, hash, c.datasets[u.dataset], loaded[u.dataset], u.seed, u.pending);
            std::lock_guard lock(store);
            for (const auto& [rel, text] : unit.files) write_text(root / rel, text);
            for (auto& r : unit.records) {
                cells << record_csv_row(r, c) << '\n';
                timings << hash << ',' << r.dataset << ',' << r.strategy << ',' << r.seed << ','
                        << format_double(r.seconds) << '\n';
                ++result.computed;
                done[r.key()] = std::move(r);
            }
            cells.flush();
            timings.flush();
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(c.workers, static_cast<unsigned>(units.size())));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ostringstream csv;
    csv << record_csv_header() << '\n';
    for (const auto& d : c.datasets)
        for (auto k : c.strategies)
            for (auto seed : c.seeds) {
                ExperimentRecord probe;
                probe.dataset = d.name;
                probe.strategy = to_string(k);
                probe.seed = seed;
                auto it = done.find(probe.key());
                if (it == done.end()) {
                    probe.status = "error";
                    probe.config_hash = hash;
                    probe.message = "cell produced no record";
                    result.records.push_back(probe);
                } else {
                    result.records.push_back(it->second);
                }
                csv << record_csv_row(result.records.back(), c) << '\n';
            }
    write_text(root / "results.csv", csv.str());
    return result;
}

// ---------------------------------------------------------------------------------------------
// Metadata

MetadataRun run_metadata(const ExperimentConfig& c) {
    const fs::path root(c.output_dir);
    fs::create_directories(root / "metadata");
    MetadataRun run;
    std::ostringstream csv, cmp;
    csv << metadata_csv_header() << '\n';
    cmp << "dataset,quantity,computed,published,abs_diff,within_0.01\n";
    for (const auto& d : c.datasets) {
        try {
            const auto ds = load_scaled(d);
            auto m = compute_metadata(ds, {c.metadata_row_cap, derive_seed(c.split_seed, "metadata:" + d.name)});
            csv << metadata_csv_row(m) << '\n';
            write_text(root / "metadata" / (d.name + ".json"), metadata_json(m));
            if (const auto* e = find_catalog_entry(d.name)) {
                auto row = [&](const std::string& what, double computed, double published) {
                    const double diff = std::abs(computed - published);
                    cmp << d.name << ',' << what << ',' << format_double(computed) << ','
                        << format_double(published) << ',' << format_double(diff) << ',' << (diff <= 0.01 + 1e-12)
                        << '\n';
                };
                const char* stat[3] = {"min", "median", "max"};
                auto emit = [&](const std::string& tag, const std::optional<DistanceSummary>& s, const double* pub) {
                    if (!s) return;
                    const double v[3] = {s->min, s->median, s->max};
                    for (int k = 0; k < 3; ++k) row(std::string(stat[k]) + "_" + tag, v[k], pub[k]);
                };
                emit("dn", m.d_n, e->d_n);
                emit("dp", m.d_p, e->d_p);
                emit("dnp", m.d_np, e->d_np);
            }
            run.rows.push_back(std::move(m));
        } catch (const std::exception& e) {
            run.errors.emplace_back(d.name, e.what());
        }
    }
    write_text(root / "metadata.csv", csv.str());
    write_text(root / "metadata_vs_published.csv", cmp.str());
    if (!run.errors.empty()) {
        std::ostringstream err;
        err << "dataset,message\n";
        for (const auto& [name, msg] : run.errors) err << name << ',' << sanitize(msg) << '\n';
        write_text(root / "metadata_errors.csv", err.str());
    }
    return run;
}

std::map<std::string, DatasetMetadata> read_metadata_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open metadata file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != metadata_csv_header())
        throw Error("metadata file has an unexpected header: " + path);
    std::map<std::string, DatasetMetadata> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto c = split_csv(line);
        if (c.size() != 16) throw Error("metadata file has a malformed row: " + path);
        DatasetMetadata m;
        m.name = c[0];
        m.f = std::stoull(c[1]);
        m.n_samples = std::stoull(c[2]);
        m.n_neg = std::stoull(c[3]);
        m.n_pos = std::stoull(c[4]);
        m.ratio = to_double(c[5]);
        auto summary = [&](std::size_t at) -> std::optional<DistanceSummary> {
            if (c[at].empty()) return std::nullopt;
            DistanceSummary s;
            s.min = to_double(c[at]);
            s.median = to_double(c[at + 1]);
            s.max = to_double(c[at + 2]);
            return s;
        };
        m.d_n = summary(6);
        m.d_p = summary(9);
        m.d_np = *summary(12);
        m.subsampled = c[15] == "1";
        out[m.name] = std::move(m);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Experiment 2

Exp2Result run_experiment2(const ExperimentConfig& c) {
    c.validate();
    if (c.exp2.dataset.path.empty()) throw Error("exp2: no dataset configured");
    const fs::path root = fs::path(c.output_dir) / "exp2";
    fs::create_directories(root);
    const std::uint64_t base = derive_seed(c.exp2.seed, "exp2");

    const auto scaled = load_scaled(c.exp2.dataset);
    if (static_cast<std::size_t>(c.q) > scaled.f())
        throw Error("exp2: cannot project " + std::to_string(scaled.f()) + " features onto q=" + std::to_string(c.q));
    const auto projected = minmax_scale(pca_project(scaled, static_cast<std::size_t>(c.q)));
    const auto split = train_test_split(projected, c.train_fraction, derive_seed(c.split_seed, c.exp2.dataset.name));
    const Matrix minority = split.train.class_rows(1);

    Exp2Result res;
    res.pca_width = projected.f();

    QcAanConfig gc = c.gan;
    gc.simple = true;
    gc.seed = derive_seed(base, "gan");
    auto gan = std::make_shared<TrainedGenerator>(train_aan(minority, NoiseSource::gaussian(c.q), gc));
    auto ansatz = make_ansatz(c.q, c.qcbm_layers);
    auto params = random_params(ansatz, derive_seed(base, "qcbm-init"));
    gc.seed = derive_seed(base, "qcaan");
    auto qcaan =
        std::make_shared<TrainedGenerator>(train_aan(minority, NoiseSource::qcbm(std::move(ansatz), std::move(params)), gc));
    res.gan_history = gan->history;
    res.qcaan_history = qcaan->history;
    write_text(root / "gan_history.csv", history_csv(*gan));
    write_text(root / "qcaan_history.csv", history_csv(*qcaan));
    write_text(root / "qcaan_qcbm.csv", qcbm_history_csv(*qcaan));

    std::ostringstream reports;
    reports << "regime,n_train," << kReportHeader << '\n';
    const std::pair<const char*, std::shared_ptr<TrainedGenerator>> regimes[] = {
        {"original", nullptr}, {"gan", gan}, {"qcaan", qcaan}};
    for (const auto& [name, model] : regimes) {
        AugmentationStrategy s;
        s.target_ratio = c.target_ratio;
        if (model) {
            s.kind = std::string(name) == "gan" ? StrategyKind::gan : StrategyKind::qcaan;
            s.model = model;
        }
        const auto train = apply_strategy(split, s, derive_seed(base, std::string("augment:") + name));
        if (!audit_test_isolation(split, train).passed) throw Error("exp2: test-isolation audit failed");
        MlpOptions mo = c.mlp;
        mo.seed = derive_seed(base, std::string("mlp:") + name);
        const auto mlp = fit_mlp_classifier(train.features, train.labels, mo);
        const auto scores = to_std(mlp.predict_proba(split.test.features));

        RegimeOutcome o;
        o.regime = name;
        o.n_train = train.rows();
        o.history = mlp.history;
        o.report = evaluate(split.test.labels, scores, c.threshold);
        o.roc = roc_curve(split.test.labels, scores);

        std::ostringstream h;
        h << "epoch,loss,accuracy,precision,recall,auc\n";
        for (std::size_t e = 0; e < o.history.size(); ++e) {
            const auto& r = o.history[e];
            h << e + 1 << ',' << format_double(r.loss) << ',' << format_double(r.accuracy) << ','
              << format_double(r.precision) << ',' << format_double(r.recall) << ',' << format_double(r.auc) << '\n';
        }
        write_text(root / ("mlp_history_" + o.regime + ".csv"), h.str());
        std::ostringstream roc;
        roc << "fpr,tpr,threshold\n";
        for (const auto& p : o.roc)
            roc << format_double(p.fpr) << ',' << format_double(p.tpr) << ',' << format_double(p.threshold) << '\n';
        write_text(root / ("roc_" + o.regime + ".csv"), roc.str());
        reports << o.regime << ',' << o.n_train << ',' << report_cells(o.report) << '\n';
        res.regimes.push_back(std::move(o));
    }
    write_text(root / "reports.csv", reports.str());

    const Matrix a = generate_synthetic(*gan, c.exp2.distinguish_samples, derive_seed(base, "distinguish:gan"));
    const Matrix b = generate_synthetic(*qcaan, c.exp2.distinguish_samples, derive_seed(base, "distinguish:qcaan"));
    res.distinguish = distinguishability_report(a, b, derive_seed(base, "distinguish"), c.logistic);
    res.distinguish_fed = static_cast<std::size_t>(res.distinguish.total());
    std::ostringstream dist;
    dist << "samples_per_generator,test_rows," << kReportHeader << '\n'
         << c.exp2.distinguish_samples << ',' << res.distinguish_fed << ',' << report_cells(res.distinguish) << '\n';
    write_text(root / "distinguish.csv", dist.str());

    json m;
    m["config_hash"] = config_hash(c);
    m["dataset"] = c.exp2.dataset.name;
    m["pca_width"] = res.pca_width;
    m["minority_train_rows"] = minority.rows();
    write_text(root / "manifest.json", m.dump(2) + "\n");
    return res;
}

// ---------------------------------------------------------------------------------------------
// Demo data

namespace {

void write_demo(const fs::path& path, const Matrix& x, const std::vector<int>& y) {
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    write_dataset_csv(make_dataset(path.stem().string(), x, y, names), path.string());
}

/// Labels the `n_pos` highest-scoring rows positive.
std::vector<int> top_k_labels(const std::vector<double>& score, std::size_t n_pos) {
    std::vector<std::size_t> order(score.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return score[a] > score[b]; });
    std::vector<int> y(score.size(), 0);
    for (std::size_t i = 0; i < n_pos; ++i) y[order[i]] = 1;
    return y;
}

}  // namespace

std::string write_demo_datasets(const std::string& dir, std::uint64_t seed) {
    const fs::path root(dir);
    fs::create_directories(root);
    Rng rng(derive_seed(seed, "demo"));

    {  // car-evaluation shape: full factorial over six categorical attributes, one-hot encoded
        const int levels[6] = {4, 4, 4, 3, 3, 3};
        Matrix x = Matrix::Zero(1728, 21);
        std::vector<double> score(1728);
        for (int i = 0; i < 1728; ++i) {
            int rest = i;
            double s = 0;
            for (int a = 5; a >= 0; --a) {
                const int v = rest % levels[a];
                rest /= levels[a];
                int col = 0;
                for (int b = 0; b < a; ++b) col += levels[b];
                x(i, col + v) = 1;
                s += (a % 2 ? 1.0 : -1.0) * v;
            }
            score[static_cast<std::size_t>(i)] = s + 0.5 * standard_normal(rng);
        }
        write_demo(root / "demo_car.csv", x, top_k_labels(score, 65));
    }
    {  // oil-spill shape: continuous, some heavy-tailed columns
        Matrix x(937, 49);
        std::vector<double> score(937);
        for (Eigen::Index i = 0; i < 937; ++i) {
            const double latent = standard_normal(rng);
            for (Eigen::Index j = 0; j < 49; ++j) {
                double v = 0.6 * latent * (j < 12 ? 1.0 : 0.2) + standard_normal(rng);
                if (j % 5 == 0) v = std::exp(0.7 * v);
                x(i, j) = v;
            }
            score[static_cast<std::size_t>(i)] = latent + 0.4 * standard_normal(rng);
        }
        write_demo(root / "demo_oil.csv", x, top_k_labels(score, 41));
    }
    {  // solar-flare shape: small integer codes and binary flags
        Matrix x(1389, 32);
        std::vector<double> score(1389);
        for (Eigen::Index i = 0; i < 1389; ++i) {
            double s = 0;
            for (Eigen::Index j = 0; j < 32; ++j) {
                const double v = j < 10 ? static_cast<double>(uniform_index(rng, 6))
                                        : static_cast<double>(uniform01(rng) < 0.3 ? 1 : 0);
                x(i, j) = v;
                if (j < 4) s += v;
                if (j >= 10 && j < 14) s += 2 * v;
            }
            score[static_cast<std::size_t>(i)] = s + standard_normal(rng);
        }
        write_demo(root / "demo_flare.csv", x, top_k_labels(score, 68));
    }

    json cfg;
    cfg["output_dir"] = "out";
    cfg["datasets"] = {{{"name", "demo_car"}, {"path", "demo_car.csv"}},
                       {{"name", "demo_oil"}, {"path", "demo_oil.csv"}},
                       {{"name", "demo_flare"}, {"path", "demo_flare.csv"}}};
    cfg["strategies"] = {"none", "random", "smote", "qcaan"};
    cfg["seeds"] = {0, 1, 2};
    cfg["q"] = 8;
    cfg["exp2"] = {{"dataset", {{"name", "demo_oil"}, {"path", "demo_oil.csv"}}}};
    const fs::path cfg_path = root / "config.json";
    write_text(cfg_path, cfg.dump(2) + "\n");
    return cfg_path.string();
}

}  // namespace qcaan
