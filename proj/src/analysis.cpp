#include "qcaan/experiment.hpp"
#include "qcaan/plots.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace qcaan {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kTestedMetrics{"accuracy", "precision", "recall", "auc"};
const std::vector<std::string> kDiffMetrics{"accuracy", "precision", "recall"};

double metric_of(const ClassificationReport& r, const std::string& m) {
    if (m == "accuracy") return r.accuracy;
    if (m == "precision") return r.precision;
    if (m == "recall") return r.recall;
    if (m == "auc") return r.auc;
    throw Error("unknown metric '" + m + "'");
}

void write_file(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name) const {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error("table lacks column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<Table> read_table(const fs::path& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    Table t;
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    t.header = split(line);
    while (std::getline(in, line))
        if (!line.empty()) t.rows.push_back(split(line));
    return t;
}

double num(const std::string& s) { return s == "nan" ? std::nan("") : std::stod(s); }

}  // namespace

const std::vector<std::string>& metadata_feature_names() {
    static const std::vector<std::string> names{"f",      "n_samples", "n_neg",  "n_pos",  "ratio",
                                                "min_dn", "med_dn",    "max_dn", "min_dp", "med_dp",
                                                "max_dp", "min_dnp",   "med_dnp", "max_dnp"};
    return names;
}

std::vector<double> metadata_features(const DatasetMetadata& m) {
    // A class with one member has no within-class pairs; 0 stands in for its distances.
    auto trio = [](const std::optional<DistanceSummary>& d) {
        return d ? std::vector<double>{d->min, d->median, d->max} : std::vector<double>{0, 0, 0};
    };
    std::vector<double> v{static_cast<double>(m.f), static_cast<double>(m.n_samples), static_cast<double>(m.n_neg),
                          static_cast<double>(m.n_pos), m.ratio};
    for (const auto& t : {trio(m.d_n), trio(m.d_p), trio(m.d_np)}) v.insert(v.end(), t.begin(), t.end());
    return v;
}

AnalysisReport run_analysis(const ExperimentConfig& config, const std::vector<ExperimentRecord>& records,
                            const std::map<std::string, DatasetMetadata>& metadata) {
    AnalysisReport rep;
    std::vector<const ExperimentRecord*> ok;
    for (const auto& r : records)
        if (r.status == "ok") ok.push_back(&r);

    std::set<std::string> seen_strategies, seen_datasets;
    for (const auto* r : ok) {
        seen_strategies.insert(r->strategy);
        seen_datasets.insert(r->dataset);
    }
    for (auto k : config.strategies)
        if (seen_strategies.erase(to_string(k))) rep.strategies.push_back(to_string(k));
    rep.strategies.insert(rep.strategies.end(), seen_strategies.begin(), seen_strategies.end());
    for (const auto& d : config.datasets)
        if (seen_datasets.erase(d.name)) rep.datasets.push_back(d.name);
    rep.datasets.insert(rep.datasets.end(), seen_datasets.begin(), seen_datasets.end());
    if (rep.strategies.size() < 2)
        throw Error("analysis: insufficient cells: need successful results for at least 2 strategies, found " +
                    std::to_string(rep.strategies.size()));

    // Seed-averaged value per (dataset, strategy, metric).
    std::map<std::tuple<std::string, std::string, std::string>, std::pair<double, int>> acc;
    for (const auto* r : ok)
        for (const auto& m : kTestedMetrics) {
            auto& slot = acc[{r->dataset, r->strategy, m}];
            slot.first += metric_of(r->report, m);
            ++slot.second;
        }

    for (const auto& m : kTestedMetrics) {
        MetricAnalysis ma;
        ma.metric = m;
        auto& groups = ma.groups;
        for (const auto& s : rep.strategies) {
            stats::NamedGroup g{s, {}};
            std::vector<std::string> names;
            for (const auto& d : rep.datasets)
                if (auto it = acc.find({d, s, m}); it != acc.end()) {
                    g.values.push_back(it->second.first / it->second.second);
                    names.push_back(d);
                }
            if (g.values.empty()) continue;
            groups.push_back(std::move(g));
            ma.group_datasets.push_back(std::move(names));
        }
        try {
            ma.omnibus = stats::kruskal_wallis(groups);
        } catch (const Error& e) {
            rep.notes.push_back(m + ": omnibus test skipped (" + e.what() + ")");
        }
        ma.dunn = stats::dunn_test(groups, config.analysis.p_adjust);
        for (const auto& g : groups) {
            const auto seed = derive_seed(config.analysis.seed, m + ":" + g.name);
            auto means = stats::bayesian_bootstrap_mean(g.values, config.analysis.replications, seed);
            ma.hdi.emplace_back(g.name, stats::hdi(std::move(means), config.analysis.hdi_mass));
        }
        rep.metrics.push_back(std::move(ma));
    }

    const auto& cand = config.analysis.candidate;
    const auto& base = config.analysis.baseline;
    const bool have_pair = std::count(rep.strategies.begin(), rep.strategies.end(), cand) &&
                           std::count(rep.strategies.begin(), rep.strategies.end(), base);
    if (!have_pair) {
        rep.notes.push_back("diff table skipped: results lack '" + cand + "' or '" + base + "' cells");
        return rep;
    }
    std::vector<MetricCell> cells;
    std::map<std::string, std::vector<double>> features;
    for (const auto* r : ok) {
        if (r->strategy != cand && r->strategy != base) continue;
        MetricCell c{r->dataset, r->strategy, {}};
        for (const auto& m : kDiffMetrics) c.metrics[m] = metric_of(r->report, m);
        cells.push_back(std::move(c));
    }
    for (const auto& d : rep.datasets) {
        const bool both = acc.count({d, cand, "accuracy"}) && acc.count({d, base, "accuracy"});
        if (!both) continue;
        auto it = metadata.find(d);
        if (it == metadata.end()) {
            rep.notes.push_back("diff table: no metadata for '" + d + "', row omitted");
            continue;
        }
        features[d] = metadata_features(it->second);
    }
    rep.diff_table = build_diff_table(cells, features, metadata_feature_names(), kDiffMetrics, cand, base);

    const auto& t = rep.diff_table;
    if (t.datasets.size() < 2) {
        rep.notes.push_back("surrogate models skipped: the diff table has fewer than 2 rows");
        return rep;
    }
    for (std::size_t m = 0; m < kDiffMetrics.size(); ++m) {
        SurrogateAnalysis sa;
        sa.metric = kDiffMetrics[m];
        const Vector y = t.diffs.col(static_cast<Eigen::Index>(m));
        auto gbt = config.analysis.gbt;
        gbt.seed = derive_seed(config.analysis.seed, "gbt:" + sa.metric);
        sa.model = fit_gbt(t.features, y, gbt, t.feature_names);
        if (sa.model.overfit_warning)
            rep.notes.push_back(sa.metric + ": surrogate fits the diff table exactly (" +
                                std::to_string(t.datasets.size()) + " rows); treat importances as descriptive");
        sa.importance = permutation_importance(sa.model, t.features, y, config.analysis.importance_repeats,
                                               derive_seed(config.analysis.seed, "importance:" + sa.metric));
        // Anchor the profiles at the dataset with the median difference (lower middle on ties).
        std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] < y[b]; });
        const Eigen::Index anchor = order[(order.size() - 1) / 2];
        std::vector<double> row(static_cast<std::size_t>(t.features.cols()));
        for (Eigen::Index j = 0; j < t.features.cols(); ++j) row[static_cast<std::size_t>(j)] = t.features(anchor, j);
        for (const auto& f : t.feature_names)
            sa.profiles.push_back(ceteris_paribus(sa.model, t.features, row, f, config.analysis.cp_grid));
        rep.surrogates.push_back(std::move(sa));
    }
    return rep;
}

void write_analysis(const ExperimentConfig& config, const AnalysisReport& rep) {
    const fs::path root = fs::path(config.output_dir) / "analysis";
    fs::create_directories(root);

    std::ostringstream omni, dunn, hdi, boot, means;
    omni << "metric,h,df,p_value\n";
    dunn << "metric,group_a,group_b,z,p_value,significant\n";
    hdi << "metric,strategy,n_datasets,mean,hdi_lo,hdi_hi,mass\n";
    boot << "metric,strategy,replicate,value\n";
    for (const auto& m : rep.metrics) {
        omni << m.metric << ',' << format_double(m.omnibus.h) << ',' << m.omnibus.df << ','
             << format_double(m.omnibus.p_value) << '\n';
        const auto& d = m.dunn;
        for (std::size_t i = 0; i < d.names.size(); ++i)
            for (std::size_t j = i + 1; j < d.names.size(); ++j)
                dunn << m.metric << ',' << d.names[i] << ',' << d.names[j] << ',' << format_double(d.z[i][j]) << ','
                     << format_double(d.p[i][j]) << ',' << (d.p[i][j] < stats::kAlpha) << '\n';
        for (std::size_t g = 0; g < m.hdi.size(); ++g) {
            const auto& [s, h] = m.hdi[g];
            const double mean = std::accumulate(h.replicate_means.begin(), h.replicate_means.end(), 0.0) /
                                static_cast<double>(h.replicate_means.size());
            hdi << m.metric << ',' << s << ',' << m.groups[g].values.size() << ',' << format_double(mean) << ',' << format_double(h.lo) << ','
                << format_double(h.hi) << ',' << format_double(h.mass) << '\n';
            for (std::size_t r = 0; r < h.replicate_means.size(); ++r)
                boot << m.metric << ',' << s << ',' << r << ',' << format_double(h.replicate_means[r]) << '\n';
        }
    }
    write_file(root / "omnibus.csv", omni.str());
    write_file(root / "dunn.csv", dunn.str());
    write_file(root / "hdi.csv", hdi.str());
    write_file(root / "bootstrap.csv", boot.str());

    const auto& t = rep.diff_table;
    std::ostringstream diff;
    diff << "dataset";
    for (const auto& m : t.metrics) diff << ",diff_" << m;
    for (const auto& f : t.feature_names) diff << ',' << f;
    diff << '\n';
    for (std::size_t i = 0; i < t.datasets.size(); ++i) {
        diff << t.datasets[i];
        for (Eigen::Index m = 0; m < t.diffs.cols(); ++m) diff << ',' << format_double(t.diffs(static_cast<Eigen::Index>(i), m));
        for (Eigen::Index f = 0; f < t.features.cols(); ++f)
            diff << ',' << format_double(t.features(static_cast<Eigen::Index>(i), f));
        diff << '\n';
    }
    write_file(root / "diff_table.csv", diff.str());

    std::ostringstream imp, cp, gbt;
    imp << "metric,feature,importance,rank\n";
    cp << "metric,feature,grid_value,prediction,anchor_value,anchor_prediction\n";
    gbt << "metric,round,train_mse\n";
    for (const auto& s : rep.surrogates) {
        std::vector<std::size_t> order(s.importance.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s.importance[a] > s.importance[b]; });
        for (std::size_t r = 0; r < order.size(); ++r)
            imp << s.metric << ',' << s.model.feature_names[order[r]] << ',' << format_double(s.importance[order[r]])
                << ',' << r + 1 << '\n';
        for (const auto& p : s.profiles)
            for (std::size_t g = 0; g < p.grid.size(); ++g)
                cp << s.metric << ',' << p.feature << ',' << format_double(p.grid[g]) << ','
                   << format_double(p.predictions[g]) << ',' << format_double(p.anchor_value) << ','
                   << format_double(p.anchor_prediction) << '\n';
        for (std::size_t r = 0; r < s.model.train_mse.size(); ++r)
            gbt << s.metric << ',' << r << ',' << format_double(s.model.train_mse[r]) << '\n';
    }
    write_file(root / "importance.csv", imp.str());
    write_file(root / "cp_profiles.csv", cp.str());
    write_file(root / "gbt_training.csv", gbt.str());

    json j;
    j["config_hash"] = config_hash(config);
    j["strategies"] = rep.strategies;
    j["datasets"] = rep.datasets;
    j["p_adjust"] = stats::to_string(config.analysis.p_adjust);
    j["alpha"] = stats::kAlpha;
    j["metrics"] = json::array();
    for (const auto& m : rep.metrics) {
        json mj;
        mj["metric"] = m.metric;
        mj["kruskal_wallis"] = {{"h", m.omnibus.h}, {"df", m.omnibus.df}, {"p_value", m.omnibus.p_value}};
        mj["hdi"] = json::object();
        for (const auto& [s, h] : m.hdi) mj["hdi"][s] = {h.lo, h.hi};
        j["metrics"].push_back(mj);
    }
    j["diff_table_rows"] = t.datasets.size();
    j["surrogates"] = json::array();
    for (const auto& s : rep.surrogates)
        j["surrogates"].push_back({{"metric", s.metric},
                                   {"trees", s.model.trees.size()},
                                   {"final_train_mse", s.model.train_mse.back()},
                                   {"overfit_warning", s.model.overfit_warning}});
    j["notes"] = rep.notes;
    write_file(root / "report.json", j.dump(2) + "\n");

    // Per-dataset, per-strategy seed means: the values behind the box plots.
    std::ostringstream box;
    box << "metric,strategy,dataset,value\n";
    for (const auto& m : rep.metrics)
        for (std::size_t g = 0; g < m.groups.size(); ++g)
            for (std::size_t i = 0; i < m.groups[g].values.size(); ++i)
                box << m.metric << ',' << m.groups[g].name << ',' << m.group_datasets[g][i] << ','
                    << format_double(m.groups[g].values[i]) << '\n';
    write_file(root / "boxplot_data.csv", box.str());
}

std::vector<std::string> emit_plots(const ExperimentConfig& config, PlotFormat format) {
    const fs::path root(config.output_dir);
    const fs::path out = root / "plots";
    std::error_code ec;
    fs::remove_all(out, ec);
    fs::create_directories(out);
    const bool svg = format == PlotFormat::svg;
    std::vector<std::string> written;
    auto emit = [&](const plots::Plot& p, const std::string& stem) {
        auto files = plots::write_plot(p, (out / stem).string(), svg);
        written.insert(written.end(), files.begin(), files.end());
    };

    if (auto t = read_table(root / "analysis" / "boxplot_data.csv")) {
        const auto cm = t->col("metric"), cs = t->col("strategy"), cv = t->col("value");
        std::map<std::string, std::vector<std::pair<std::string, std::vector<double>>>> by_metric;
        for (const auto& r : t->rows) {
            auto& groups = by_metric[r[cm]];
            auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == r[cs]; });
            if (it == groups.end()) {
                groups.emplace_back(r[cs], std::vector<double>{});
                it = groups.end() - 1;
            }
            it->second.push_back(num(r[cv]));
        }
        for (const auto& [metric, groups] : by_metric) {
            plots::Plot p;
            p.kind = plots::Kind::box;
            p.title = metric + " across datasets";
            p.xlabel = "strategy";
            p.ylabel = metric;
            for (const auto& [s, v] : groups) p.boxes.push_back(plots::box_stats(s, v));
            emit(p, "box_" + metric);
        }
    }
    if (auto t = read_table(root / "analysis" / "hdi.csv")) {
        const auto cm = t->col("metric"), cs = t->col("strategy"), cmean = t->col("mean"), lo = t->col("hdi_lo"),
                   hi = t->col("hdi_hi");
        std::map<std::string, plots::Plot> by_metric;
        for (const auto& r : t->rows) {
            auto& p = by_metric[r[cm]];
            p.kind = plots::Kind::interval;
            p.title = "Bayesian bootstrap mean " + r[cm];
            p.xlabel = "strategy";
            p.ylabel = r[cm];
            p.intervals.push_back({r[cs], num(r[cmean]), num(r[lo]), num(r[hi])});
        }
        for (const auto& [metric, p] : by_metric) emit(p, "hdi_" + metric);
    }
    if (auto t = read_table(root / "analysis" / "diff_table.csv")) {
        for (std::size_t c = 1; c < t->header.size(); ++c) {
            if (t->header[c].rfind("diff_", 0) != 0) continue;
            plots::Plot p;
            p.kind = plots::Kind::bar;
            p.title = t->header[c];
            p.xlabel = "dataset";
            p.ylabel = t->header[c];
            for (const auto& r : t->rows) p.bars.push_back({t->header[c], r[0], num(r[c])});
            emit(p, t->header[c]);
        }
    }
    if (auto t = read_table(root / "analysis" / "importance.csv")) {
        std::map<std::string, plots::Plot> by_metric;
        for (const auto& r : t->rows) {
            auto& p = by_metric[r[0]];
            p.kind = plots::Kind::bar;
            p.title = "permutation importance for " + r[0] + " difference";
            p.xlabel = "feature";
            p.ylabel = "MSE increase";
            p.bars.push_back({r[0], r[1], num(r[2])});
        }
        for (const auto& [metric, p] : by_metric) emit(p, "importance_" + metric);
    }
    if (auto t = read_table(root / "analysis" / "cp_profiles.csv")) {
        std::map<std::string, plots::Plot> by_metric;
        for (const auto& r : t->rows) {
            auto& p = by_metric[r[0]];
            p.kind = plots::Kind::line;
            p.title = "ceteris paribus profiles, " + r[0] + " difference";
            p.xlabel = "feature value";
            p.ylabel = "predicted difference";
            if (p.series.empty() || p.series.back().name != r[1]) p.series.push_back({r[1], {}, {}});
            p.series.back().x.push_back(num(r[2]));
            p.series.back().y.push_back(num(r[3]));
        }
        for (const auto& [metric, p] : by_metric) emit(p, "cp_" + metric);
    }

    plots::Plot roc{plots::Kind::line, "ROC curves", "false positive rate", "true positive rate", {}, {}, {}, {}};
    plots::Plot loss{plots::Kind::line, "MLP training loss", "epoch", "BCE loss", {}, {}, {}, {}};
    plots::Plot auc{plots::Kind::line, "MLP training AUC", "epoch", "AUC", {}, {}, {}, {}};
    for (const std::string regime : {"original", "gan", "qcaan"}) {
        if (auto t = read_table(root / "exp2" / ("roc_" + regime + ".csv"))) {
            plots::Series s{regime, {}, {}};
            for (const auto& r : t->rows) {
                s.x.push_back(num(r[0]));
                s.y.push_back(num(r[1]));
            }
            roc.series.push_back(std::move(s));
        }
        if (auto t = read_table(root / "exp2" / ("mlp_history_" + regime + ".csv"))) {
            plots::Series l{regime, {}, {}}, a{regime, {}, {}};
            const auto ca = t->col("auc");
            for (const auto& r : t->rows) {
                l.x.push_back(num(r[0]));
                l.y.push_back(num(r[1]));
                a.x.push_back(num(r[0]));
                a.y.push_back(num(r[ca]));
            }
            loss.series.push_back(std::move(l));
            auc.series.push_back(std::move(a));
        }
    }
    if (!roc.series.empty()) emit(roc, "exp2_roc");
    if (!loss.series.empty()) {
        emit(loss, "exp2_mlp_loss");
        emit(auc, "exp2_mlp_auc");
    }

    auto gan_plot = [&](const fs::path& csv, const std::string& title, const std::string& stem) {
        auto t = read_table(csv);
        if (!t) return;
        plots::Plot p{plots::Kind::line, title, "epoch", "loss", {{"discriminator", {}, {}}, {"generator", {}, {}}},
                      {}, {}, {}};
        for (const auto& r : t->rows) {
            for (auto& s : p.series) s.x.push_back(num(r[0]));
            p.series[0].y.push_back(num(r[1]));
            p.series[1].y.push_back(num(r[2]));
        }
        emit(p, stem);
    };
    gan_plot(root / "exp2" / "gan_history.csv", "GAN losses (experiment 2)", "exp2_gan_losses");
    gan_plot(root / "exp2" / "qcaan_history.csv", "QC-AAN losses (experiment 2)", "exp2_qcaan_losses");
    if (fs::is_directory(root / "histories")) {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(root / "histories")) {
            const auto name = e.path().filename().string();
            if (e.path().extension() == ".csv" && name.find("_qcbm") == std::string::npos) files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) gan_plot(f, f.stem().string() + " losses", "training_" + f.stem().string());
    }
    return written;
}

}  // namespace qcaan
