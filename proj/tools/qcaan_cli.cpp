// Command-line driver for the benchmark: data preparation, both experiments, analysis and plots.

#include "qcaan/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace qcaan;

namespace {

void log_config(const ExperimentConfig& c) {
    std::cerr << "config hash " << config_hash(c) << ", output " << c.output_dir << ", q=" << c.q << ", "
              << c.datasets.size() << " dataset(s), " << c.strategies.size() << " strategies, " << c.seeds.size()
              << " seed(s)\n";
    for (const auto& [name, why] : c.filtered_out) std::cerr << "  filtered out " << name << " (" << why << ")\n";
}

void save_effective_config(const ExperimentConfig& c) {
    fs::create_directories(c.output_dir);
    std::ofstream(fs::path(c.output_dir) / "effective_config.json") << config_json(c) << '\n';
}

int cmd_prepare(const ExperimentConfig& c) {
    fs::create_directories(c.output_dir);
    std::ofstream out(fs::path(c.output_dir) / "catalog_check.csv");
    out << "dataset,rows,f,n_neg,n_pos,ratio,catalog,status,detail\n";
    int failures = 0;
    for (const auto& d : c.datasets) {
        try {
            auto ds = load_dataset(d.path, {d.label_column, d.positive_label, d.delimiter});
            const double ratio = static_cast<double>(ds.n_neg()) / static_cast<double>(ds.n_pos());
            std::string status = "loaded", detail;
            const auto* entry = find_catalog_entry(d.name);
            if (entry) {
                const auto diffs = catalog_mismatches(ds, *entry);
                status = diffs.empty() ? "match" : "mismatch";
                for (const auto& m : diffs) detail += (detail.empty() ? "" : "; ") + m;
                if (!diffs.empty()) ++failures;
            }
            out << d.name << ',' << ds.rows() << ',' << ds.f() << ',' << ds.n_neg() << ',' << ds.n_pos() << ','
                << format_double(ratio) << ',' << (entry ? "yes" : "no") << ',' << status << ',' << detail << '\n';
            std::cout << d.name << ": " << ds.rows() << " rows, f=" << ds.f() << ", " << ds.n_neg() << "/"
                      << ds.n_pos() << " (ratio " << format_double(ratio) << "), " << status
                      << (detail.empty() ? "" : " [" + detail + "]") << '\n';
        } catch (const std::exception& e) {
            ++failures;
            out << d.name << ",,,,,,,error," << e.what() << '\n';
            std::cout << d.name << ": error: " << e.what() << '\n';
        }
    }
    return failures == 0 ? 0 : 1;
}

int cmd_metadata(const ExperimentConfig& c) {
    const auto run = run_metadata(c);
    for (const auto& m : run.rows) std::cout << metadata_csv_row(m) << '\n';
    for (const auto& [name, msg] : run.errors) std::cerr << name << ": error: " << msg << '\n';
    return run.errors.empty() ? 0 : 1;
}

int cmd_exp1(const ExperimentConfig& c) {
    const auto res = run_experiment1(c);
    std::size_t failed = 0;
    for (const auto& r : res.records)
        if (r.status != "ok") {
            ++failed;
            std::cerr << "  " << r.key() << ": " << r.message << '\n';
        }
    std::cout << res.records.size() << " cells (" << res.computed << " computed, " << res.reused << " reused, "
              << failed << " failed); results in " << (fs::path(c.output_dir) / "results.csv").string() << '\n';
    return res.complete() ? 0 : 1;
}

int cmd_exp2(const ExperimentConfig& c) {
    const auto res = run_experiment2(c);
    std::cout << "PCA width " << res.pca_width << '\n';
    for (const auto& r : res.regimes)
        std::cout << r.regime << ": accuracy " << format_double(r.report.accuracy) << ", precision "
                  << format_double(r.report.precision) << ", recall " << format_double(r.report.recall) << ", auc "
                  << format_double(r.report.auc) << '\n';
    const auto& d = res.distinguish;
    std::cout << "distinguishability TN=" << d.tn << " FP=" << d.fp << " FN=" << d.fn << " TP=" << d.tp
              << " accuracy " << format_double(d.accuracy) << '\n';
    return 0;
}

int cmd_analyze(const ExperimentConfig& c) {
    const fs::path root(c.output_dir);
    const auto records = read_records_csv((root / "results.csv").string());
    std::map<std::string, DatasetMetadata> metadata;
    if (fs::exists(root / "metadata.csv"))
        metadata = read_metadata_csv((root / "metadata.csv").string());
    else
        for (auto& m : run_metadata(c).rows) metadata[m.name] = std::move(m);
    const auto report = run_analysis(c, records, metadata);
    write_analysis(c, report);
    for (const auto& m : report.metrics)
        std::cout << m.metric << ": Kruskal-Wallis H=" << format_double(m.omnibus.h)
                  << " p=" << format_double(m.omnibus.p_value) << '\n';
    for (const auto& n : report.notes) std::cerr << "note: " << n << '\n';
    std::cout << "diff table rows: " << report.diff_table.datasets.size() << '\n';
    return 0;
}

int cmd_plots(const ExperimentConfig& c, const std::string& format) {
    const auto files = emit_plots(c, format == "csv-only" ? PlotFormat::csv_only : PlotFormat::svg);
    std::cout << files.size() << " files written to " << (fs::path(c.output_dir) / "plots").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qcaan: imbalanced-data oversampling benchmark with a simulated QC-AAN"};
    app.require_subcommand(1);
    std::string config_path;
    unsigned workers = 0;

    auto* prepare = app.add_subcommand("prepare", "Validate dataset files against the catalog, or write demo data");
    std::string demo_dir;
    prepare->add_option("--synthetic-demo", demo_dir, "Write catalog-shaped synthetic datasets and a config here");
    prepare->add_option("-c,--config", config_path, "Experiment config (JSON)");

    std::vector<CLI::App*> needs_config;
    for (auto [name, help] : {std::pair{"metadata", "Distance metadata for every configured dataset"},
                              std::pair{"exp1", "Run the datasets x strategies x seeds matrix"},
                              std::pair{"exp2", "PCA + GAN/QC-AAN + MLP pipeline and distinguishability"},
                              std::pair{"analyze", "Statistics and surrogate explanations over experiment-1 results"},
                              std::pair{"plots", "Regenerate figures and their CSV twins"}}) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
        needs_config.push_back(sub);
    }
    needs_config[1]->add_option("-j,--workers", workers, "Worker threads (overrides the config)");
    std::string format = "svg";
    needs_config[4]->add_option("--format", format, "svg or csv-only")->check(CLI::IsMember({"svg", "csv-only"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (prepare->parsed() && !demo_dir.empty()) {
            std::cout << write_demo_datasets(demo_dir) << '\n';
            if (config_path.empty()) return 0;
        }
        if (config_path.empty()) {
            std::cerr << "prepare: give --config or --synthetic-demo\n";
            return 2;
        }
        auto config = load_config(config_path);
        if (workers > 0) config.workers = workers;
        log_config(config);
        save_effective_config(config);
        const std::string verb = app.get_subcommands().front()->get_name();
        if (verb == "prepare") return cmd_prepare(config);
        if (verb == "metadata") return cmd_metadata(config);
        if (verb == "exp1") return cmd_exp1(config);
        if (verb == "exp2") return cmd_exp2(config);
        if (verb == "analyze") return cmd_analyze(config);
        return cmd_plots(config, format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
