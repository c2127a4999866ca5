#include "qcaan/aan.hpp"
#include "qcaan/classify.hpp"
#include "qcaan/data.hpp"
#include "qcaan/experiment.hpp"
#include "qcaan/neuralnet.hpp"
#include "qcaan/quantum.hpp"
#include "qcaan/resample.hpp"
#include "qcaan/stats.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace qcaan;

namespace {

py::dict distances(const DistanceSummary& d) {
    py::dict out;
    out["min"] = d.min;
    out["median"] = d.median;
    out["max"] = d.max;
    out["pairs"] = d.pairs;
    return out;
}

py::dict report_dict(const ClassificationReport& r) {
    py::dict out;
    out["tn"] = r.tn;
    out["fp"] = r.fp;
    out["fn"] = r.fn;
    out["tp"] = r.tp;
    out["accuracy"] = r.accuracy;
    out["precision"] = r.precision;
    out["recall"] = r.recall;
    out["auc"] = r.auc;
    out["precision_undefined"] = r.precision_undefined;
    out["recall_undefined"] = r.recall_undefined;
    return out;
}

py::array_t<std::uint8_t> bits_array(const BitstringBatch& b) {
    py::array_t<std::uint8_t> out({b.rows(), static_cast<std::size_t>(b.q)});
    std::copy(b.bits.begin(), b.bits.end(), out.mutable_data());
    return out;
}

BitstringBatch bits_from_array(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw Error("bitstrings must be a 2-D array");
    BitstringBatch b;
    b.q = static_cast<int>(a.shape(1));
    b.bits.assign(a.data(), a.data() + a.size());
    for (auto v : b.bits)
        if (v > 1) throw Error("bitstrings must contain only 0 and 1");
    return b;
}

CircuitParams circuit_params(const CircuitAnsatz& a, const std::optional<std::vector<double>>& theta,
                             std::uint64_t seed) {
    return theta ? CircuitParams{*theta} : random_params(a, seed);
}

TabularDataset as_dataset(const Matrix& x, const std::vector<int>& y) { return make_dataset("array", x, y); }

}  // namespace

PYBIND11_MODULE(_qcaan, m) {
    m.doc() = "Quantum-classical adversarial oversampling benchmark core";
    py::register_exception<Error>(m, "QcaanError", PyExc_ValueError);

    m.def(
        "load_dataset",
        [](const std::string& path, const std::string& label_column, const std::string& positive_label,
           char delimiter) {
            const auto ds = load_dataset(path, {label_column, positive_label, delimiter});
            return py::make_tuple(ds.features, ds.labels, ds.feature_names);
        },
        py::arg("path"), py::arg("label_column") = "label", py::arg("positive_label") = "1",
        py::arg("delimiter") = ',', "Returns (features, labels, feature_names).");

    m.def(
        "minmax_scale",
        [](const Matrix& x) {
            return minmax_scale(make_dataset("array", x, std::vector<int>(static_cast<std::size_t>(x.rows()), 0)))
                .features;
        },
        py::arg("x"));

    m.def(
        "compute_metadata",
        [](const Matrix& x, const std::vector<int>& y, std::size_t row_cap, std::uint64_t seed) {
            const auto md = compute_metadata(as_dataset(x, y), {row_cap, seed});
            py::dict out;
            out["f"] = md.f;
            out["n_samples"] = md.n_samples;
            out["n_neg"] = md.n_neg;
            out["n_pos"] = md.n_pos;
            out["ratio"] = md.ratio;
            out["d_n"] = md.d_n ? py::object(distances(*md.d_n)) : py::none();
            out["d_p"] = md.d_p ? py::object(distances(*md.d_p)) : py::none();
            out["d_np"] = distances(md.d_np);
            out["subsampled"] = md.subsampled;
            return out;
        },
        py::arg("x"), py::arg("y"), py::arg("row_cap") = 20000, py::arg("seed") = 0);

    m.def(
        "born_probabilities",
        [](int q, int layers, std::optional<std::vector<double>> theta, std::uint64_t seed) {
            const auto a = make_ansatz(q, layers);
            return simulate(a, circuit_params(a, theta, seed)).probabilities();
        },
        py::arg("q"), py::arg("layers") = 2, py::arg("theta") = py::none(), py::arg("seed") = 0,
        "Exact Born probabilities of the hardware-efficient ansatz; index bit j is qubit j.");

    m.def(
        "sample_bitstrings",
        [](int q, int layers, std::optional<std::vector<double>> theta, std::size_t shots, std::uint64_t seed) {
            const auto a = make_ansatz(q, layers);
            return bits_array(sample_bitstrings(simulate(a, circuit_params(a, theta, seed)), shots, seed));
        },
        py::arg("q"), py::arg("layers") = 2, py::arg("theta") = py::none(), py::arg("shots") = 1024,
        py::arg("seed") = 0);

    m.def(
        "sinkhorn_divergence",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& b, double epsilon,
           int max_iters) {
            return sinkhorn_divergence(bits_from_array(a), bits_from_array(b), epsilon, max_iters).value;
        },
        py::arg("a"), py::arg("b"), py::arg("epsilon") = 1.0, py::arg("max_iters") = 200);

    m.def(
        "train_qcbm",
        [](const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& target, int layers, int iters,
           std::size_t batch, double epsilon, std::uint64_t seed) {
            const auto t = bits_from_array(target);
            const auto a = make_ansatz(t.q, layers);
            QcbmTrainConfig cfg;
            cfg.iters = iters;
            cfg.batch = batch;
            cfg.epsilon = epsilon;
            cfg.seed = seed;
            const auto r = train_qcbm(a, random_params(a, seed), t, cfg);
            py::dict out;
            out["theta"] = r.params.theta;
            out["initial_loss"] = r.trace.initial_loss;
            out["final_loss"] = r.trace.final_loss;
            out["step_loss"] = r.trace.step_loss;
            return out;
        },
        py::arg("target"), py::arg("layers") = 2, py::arg("iters") = 20, py::arg("batch") = 512,
        py::arg("epsilon") = 1.0, py::arg("seed") = 0);

    m.def(
        "generator_hidden_dims",
        [](int f, int q, bool literal) {
            return build_generator_spec(f, q, false, literal ? ArchitectureRule::literal : ArchitectureRule::doubling)
                .hidden_dims();
        },
        py::arg("f"), py::arg("q"), py::arg("literal") = false);

    m.def(
        "discriminator_hidden_dims",
        [](int f, int q, bool literal) {
            return build_discriminator_spec(f, q, false,
                                            literal ? ArchitectureRule::literal : ArchitectureRule::doubling)
                .hidden_dims();
        },
        py::arg("f"), py::arg("q"), py::arg("literal") = false);

    m.def(
        "qcaan_oversample",
        [](const Matrix& minority, std::size_t count, int q, int epochs, int refresh_period, int qcbm_iters,
           bool quantum, bool simple, std::uint64_t seed) {
            QcAanConfig cfg;
            cfg.epochs = epochs;
            cfg.refresh_period = refresh_period;
            cfg.qcbm_iters = qcbm_iters;
            cfg.simple = simple;
            cfg.seed = seed;
            NoiseSource noise = quantum ? NoiseSource::qcbm(make_ansatz(q, 2), random_params(make_ansatz(q, 2), seed))
                                        : NoiseSource::gaussian(q);
            const auto model = train_aan(minority, std::move(noise), cfg);
            return generate_synthetic(model, count, seed);
        },
        py::arg("minority"), py::arg("count"), py::arg("q") = 8, py::arg("epochs") = 50, py::arg("refresh_period") = 5,
        py::arg("qcbm_iters") = 20, py::arg("quantum") = true, py::arg("simple") = true, py::arg("seed") = 0,
        "Trains an adversarial generator on minority rows and draws `count` synthetic rows.");

    m.def(
        "smote",
        [](const Matrix& minority, std::size_t n_new, std::size_t k, std::uint64_t seed) {
            return smote(minority, k, n_new, seed);
        },
        py::arg("minority"), py::arg("n_new"), py::arg("k") = 5, py::arg("seed") = 0);
    m.def("random_oversample", &random_oversample, py::arg("minority"), py::arg("n_new"), py::arg("seed") = 0);

    m.def(
        "fit_logistic_scores",
        [](const Matrix& x_train, const std::vector<int>& y_train, const Matrix& x_test, double l2) {
            return predict_proba(fit_logistic(x_train, y_train, {l2}), x_test);
        },
        py::arg("x_train"), py::arg("y_train"), py::arg("x_test"), py::arg("l2") = 1.0);

    m.def(
        "evaluate",
        [](const std::vector<int>& y, const std::vector<double>& scores, double threshold) {
            return report_dict(evaluate(y, scores, threshold));
        },
        py::arg("y_true"), py::arg("scores"), py::arg("threshold") = 0.5);
    m.def(
        "report_from_counts",
        [](long tn, long fp, long fn, long tp) { return report_dict(report_from_counts(tn, fp, fn, tp)); },
        py::arg("tn"), py::arg("fp"), py::arg("fn"), py::arg("tp"));

    auto to_groups = [](const std::map<std::string, std::vector<double>>& g) {
        stats::MetricSampleGroups out;
        for (const auto& [name, values] : g) out.push_back({name, values});
        return out;
    };
    m.def(
        "kruskal_wallis",
        [to_groups](const std::map<std::string, std::vector<double>>& groups) {
            const auto kw = stats::kruskal_wallis(to_groups(groups));
            return py::make_tuple(kw.h, kw.p_value, kw.df);
        },
        py::arg("groups"), "Returns (H, p, df); groups are taken in name order.");
    m.def(
        "dunn_test",
        [to_groups](const std::map<std::string, std::vector<double>>& groups, const std::string& adjust) {
            const auto d = stats::dunn_test(to_groups(groups), stats::p_adjust_from_string(adjust));
            return py::make_tuple(d.names, d.z, d.p);
        },
        py::arg("groups"), py::arg("adjust") = "none", "Returns (names, z, p) with names in sorted order.");
    m.def("bayesian_bootstrap_mean", &stats::bayesian_bootstrap_mean, py::arg("values"),
          py::arg("replications") = 4000, py::arg("seed") = 0);
    m.def(
        "hdi",
        [](const std::vector<double>& replicates, double mass) {
            const auto h = stats::hdi(replicates, mass);
            return py::make_tuple(h.lo, h.hi);
        },
        py::arg("replicates"), py::arg("mass") = 0.95);

    m.def("write_demo_datasets", &write_demo_datasets, py::arg("dir"), py::arg("seed") = 7,
          "Writes synthetic demo datasets and a config; returns the config path.");
    m.def(
        "run_experiment1",
        [](const std::string& config_path) {
            const auto c = load_config(config_path);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run_experiment1(c);
            }
            py::list rows;
            for (const auto& rec : r.records) {
                py::dict d = report_dict(rec.report);
                d["dataset"] = rec.dataset;
                d["strategy"] = rec.strategy;
                d["seed"] = rec.seed;
                d["status"] = rec.status;
                rows.append(d);
            }
            py::dict out;
            out["output_dir"] = c.output_dir;
            out["computed"] = r.computed;
            out["reused"] = r.reused;
            out["complete"] = r.complete();
            out["records"] = rows;
            return out;
        },
        py::arg("config_path"));
    m.def("config_hash", [](const std::string& path) { return config_hash(load_config(path)); },
          py::arg("config_path"));
}
