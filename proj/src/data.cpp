#include "qcaan/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace qcaan {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out(s.substr(b, e - b));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            cur.push_back(c);
        } else if (c == delim && !quoted) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(trim(cur));
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    double v = 0;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

bool labels_equal(const std::string& value, const std::string& positive) {
    if (value == positive) return true;
    auto a = parse_number(value);
    auto b = parse_number(positive);
    return a && b && *a == *b;
}

// Collects squared distances; either keeps all of them or, past `kMaxKept`, finds
// the two central order statistics with a histogram pass over a second enumeration.
constexpr std::size_t kMaxKept = 8'000'000;
constexpr std::size_t kBins = 1u << 16;

template <typename Enumerate>
DistanceSummary summarize(Enumerate&& enumerate, std::size_t pairs) {
    DistanceSummary out;
    out.pairs = pairs;
    if (pairs == 0) return out;
    const std::size_t k1 = (pairs - 1) / 2;
    const std::size_t k2 = pairs / 2;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double s1 = 0, s2 = 0;
    if (pairs <= kMaxKept) {
        std::vector<double> all;
        all.reserve(pairs);
        enumerate([&](double d2) { all.push_back(d2); });
        auto [mn, mx] = std::minmax_element(all.begin(), all.end());
        lo = *mn;
        hi = *mx;
        std::nth_element(all.begin(), all.begin() + k2, all.end());
        s2 = all[k2];
        s1 = k1 == k2 ? s2 : *std::max_element(all.begin(), all.begin() + k2);
    } else {
        enumerate([&](double d2) {
            lo = std::min(lo, d2);
            hi = std::max(hi, d2);
        });
        const double width = hi > lo ? (hi - lo) / static_cast<double>(kBins) : 1.0;
        auto bin_of = [&](double d2) {
            auto b = static_cast<std::size_t>((d2 - lo) / width);
            return std::min(b, kBins - 1);
        };
        std::vector<std::size_t> counts(kBins, 0);
        enumerate([&](double d2) { ++counts[bin_of(d2)]; });
        std::size_t cum = 0, b1 = 0, b2 = 0, before = 0;
        bool found1 = false;
        for (std::size_t b = 0; b < kBins; ++b) {
            if (!found1 && cum + counts[b] > k1) {
                b1 = b;
                before = cum;
                found1 = true;
            }
            if (cum + counts[b] > k2) {
                b2 = b;
                break;
            }
            cum += counts[b];
        }
        std::vector<double> kept;
        enumerate([&](double d2) {
            auto b = bin_of(d2);
            if (b >= b1 && b <= b2) kept.push_back(d2);
        });
        std::sort(kept.begin(), kept.end());
        s1 = kept[k1 - before];
        s2 = kept[k2 - before];
    }
    out.min = std::sqrt(lo);
    out.max = std::sqrt(hi);
    out.median = 0.5 * (std::sqrt(s1) + std::sqrt(s2));
    return out;
}

inline double squared_distance(const double* a, const double* b, Eigen::Index f) {
    double s = 0;
    for (Eigen::Index k = 0; k < f; ++k) {
        const double d = a[k] - b[k];
        s += d * d;
    }
    return s;
}

Matrix subsample_rows(const Matrix& rows, std::size_t cap, Rng& rng) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(rows.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    shuffle(idx.begin(), idx.end(), rng);
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    Matrix out(static_cast<Eigen::Index>(cap), rows.cols());
    for (std::size_t i = 0; i < cap; ++i) out.row(static_cast<Eigen::Index>(i)) = rows.row(idx[i]);
    return out;
}

TabularDataset select_rows(const TabularDataset& ds, const std::vector<std::size_t>& idx) {
    TabularDataset out;
    out.name = ds.name;
    out.feature_names = ds.feature_names;
    out.features.resize(static_cast<Eigen::Index>(idx.size()), ds.features.cols());
    out.labels.reserve(idx.size());
    out.origin.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(idx[i]));
        out.labels.push_back(ds.labels[idx[i]]);
        out.origin.push_back(ds.origin[idx[i]]);
    }
    return out;
}

}  // namespace

std::size_t TabularDataset::n_pos() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

Matrix TabularDataset::class_rows(int label) const {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) idx.push_back(static_cast<Eigen::Index>(i));
    Matrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = features.row(idx[i]);
    return out;
}

void TabularDataset::validate() const {
    if (labels.size() != rows()) throw Error("dataset '" + name + "': label count does not match row count");
    if (!origin.empty() && origin.size() != rows())
        throw Error("dataset '" + name + "': provenance count does not match row count");
    if (!feature_names.empty() && feature_names.size() != f())
        throw Error("dataset '" + name + "': feature name count does not match column count");
    for (int y : labels)
        if (y != 0 && y != 1) throw Error("dataset '" + name + "': labels must be 0 or 1");
}

TabularDataset make_dataset(std::string name, Matrix features, std::vector<int> labels,
                            std::vector<std::string> feature_names) {
    TabularDataset ds;
    ds.name = std::move(name);
    ds.features = std::move(features);
    ds.labels = std::move(labels);
    if (feature_names.empty()) {
        for (Eigen::Index j = 0; j < ds.features.cols(); ++j) feature_names.push_back("x" + std::to_string(j));
    }
    ds.feature_names = std::move(feature_names);
    ds.origin.resize(ds.labels.size());
    for (std::size_t i = 0; i < ds.origin.size(); ++i) ds.origin[i].source_index = static_cast<std::int64_t>(i);
    ds.validate();
    return ds;
}

TabularDataset load_dataset(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error("empty dataset file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_line(line, opts.delimiter);
    auto it = std::find(header.begin(), header.end(), opts.label_column);
    if (it == header.end()) throw Error("label column '" + opts.label_column + "' not found in " + path);
    const auto label_col = static_cast<std::size_t>(it - header.begin());

    std::vector<std::string> names;
    for (std::size_t j = 0; j < header.size(); ++j)
        if (j != label_col) names.push_back(header[j]);

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_line(line, opts.delimiter);
        if (cells.size() != header.size())
            throw Error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                        " fields, found " + std::to_string(cells.size()));
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == label_col) continue;
            auto v = parse_number(cells[j]);
            if (!v || !std::isfinite(*v))
                throw Error(path + ":" + std::to_string(lineno) + ": non-numeric value '" + cells[j] +
                            "' in column '" + header[j] + "'");
            values.push_back(*v);
        }
        labels.push_back(labels_equal(cells[label_col], opts.positive_label) ? 1 : 0);
    }
    const auto n = static_cast<Eigen::Index>(labels.size());
    const auto f = static_cast<Eigen::Index>(names.size());
    Matrix x(n, f);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < f; ++j) x(i, j) = values[static_cast<std::size_t>(i * f + j)];

    std::string name = path;
    if (auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
    if (auto dot = name.find_last_of('.'); dot != std::string::npos) name = name.substr(0, dot);
    auto ds = make_dataset(name, std::move(x), std::move(labels), std::move(names));
    if (ds.n_pos() == 0 || ds.n_neg() == 0) throw Error("single-class dataset: " + path);
    return ds;
}

void write_dataset_csv(const TabularDataset& ds, const std::string& path, bool with_origin) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    for (std::size_t j = 0; j < ds.f(); ++j) out << ds.feature_names[j] << ',';
    out << "label";
    if (with_origin) out << ",origin";
    out << '\n';
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < ds.f(); ++j)
            out << format_double(ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << ',';
        out << ds.labels[i];
        if (with_origin) out << ',' << ds.origin[i].tag;
        out << '\n';
    }
}

TabularDataset minmax_scale(const TabularDataset& ds) {
    if (ds.rows() == 0) throw Error("minmax_scale: empty dataset");
    TabularDataset out = ds;
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
        const double lo = ds.features.col(j).minCoeff();
        const double hi = ds.features.col(j).maxCoeff();
        if (hi > lo)
            out.features.col(j) = (ds.features.col(j).array() - lo) / (hi - lo);
        else
            out.features.col(j).setZero();
    }
    return out;
}

TrainTestSplit train_test_split(const TabularDataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw Error("train_test_split: fraction must lie in (0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < ds.rows(); ++i) by_class[ds.labels[i]].push_back(i);
    for (int c = 0; c < 2; ++c)
        if (by_class[c].size() < 2)
            throw Error("train_test_split: class " + std::to_string(c) + " has fewer than 2 samples");

    // Largest-remainder apportionment so the total equals round(fraction * N).
    const auto total = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.rows())));
    std::size_t quota[2];
    double remainder[2];
    for (int c = 0; c < 2; ++c) {
        const double exact = fraction * static_cast<double>(by_class[c].size());
        quota[c] = static_cast<std::size_t>(std::floor(exact));
        remainder[c] = exact - std::floor(exact);
    }
    std::size_t assigned = quota[0] + quota[1];
    int order[2] = {0, 1};
    if (remainder[1] > remainder[0]) std::swap(order[0], order[1]);
    for (int k = 0; assigned < total && k < 2; ++k, ++assigned) ++quota[order[k]];
    for (int c = 0; c < 2; ++c) quota[c] = std::clamp<std::size_t>(quota[c], 1, by_class[c].size() - 1);

    Rng rng(derive_seed(seed, "train_test_split"));
    std::vector<std::size_t> train_idx, test_idx;
    for (int c = 0; c < 2; ++c) {
        auto idx = by_class[c];
        shuffle(idx.begin(), idx.end(), rng);
        train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]));
        test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(quota[c]), idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    TrainTestSplit split;
    split.train = select_rows(ds, train_idx);
    split.test = select_rows(ds, test_idx);
    split.train_fraction = fraction;
    split.seed = seed;
    return split;
}

DistanceSummary within_distances(const Matrix& rows) {
    const RowMajor x = rows;
    const Eigen::Index n = x.rows(), f = x.cols();
    const std::size_t pairs = n < 2 ? 0 : static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2;
    return summarize(
        [&](auto&& sink) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double* a = x.data() + i * f;
                for (Eigen::Index j = i + 1; j < n; ++j) sink(squared_distance(a, x.data() + j * f, f));
            }
        },
        pairs);
}

DistanceSummary between_distances(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw Error("between_distances: column mismatch");
    const RowMajor xa = a, xb = b;
    const Eigen::Index f = xa.cols();
    return summarize(
        [&](auto&& sink) {
            for (Eigen::Index i = 0; i < xa.rows(); ++i) {
                const double* p = xa.data() + i * f;
                for (Eigen::Index j = 0; j < xb.rows(); ++j) sink(squared_distance(p, xb.data() + j * f, f));
            }
        },
        static_cast<std::size_t>(xa.rows()) * static_cast<std::size_t>(xb.rows()));
}

DatasetMetadata compute_metadata(const TabularDataset& ds, const MetadataOptions& opts) {
    DatasetMetadata m;
    m.name = ds.name;
    m.f = ds.f();
    m.n_samples = ds.rows();
    m.n_neg = ds.n_neg();
    m.n_pos = ds.n_pos();
    if (m.n_neg == 0 || m.n_pos == 0) throw Error("compute_metadata: both classes must be non-empty");
    m.ratio = static_cast<double>(m.n_neg) / static_cast<double>(m.n_pos);
    m.row_cap = opts.row_cap;

    Matrix neg = ds.class_rows(0), pos = ds.class_rows(1);
    Rng rng(derive_seed(opts.seed, "metadata-subsample"));
    if (opts.row_cap > 0 && static_cast<std::size_t>(neg.rows()) > opts.row_cap) {
        neg = subsample_rows(neg, opts.row_cap, rng);
        m.subsampled = true;
    }
    if (opts.row_cap > 0 && static_cast<std::size_t>(pos.rows()) > opts.row_cap) {
        pos = subsample_rows(pos, opts.row_cap, rng);
        m.subsampled = true;
    }
    if (neg.rows() >= 2) m.d_n = within_distances(neg);
    if (pos.rows() >= 2) m.d_p = within_distances(pos);
    m.d_np = between_distances(neg, pos);
    return m;
}

namespace {
void triple_json(std::ostringstream& os, const char* key, const std::optional<DistanceSummary>& d) {
    os << "  \"min_" << key << "\": " << (d ? format_double(d->min) : "null") << ",\n";
    os << "  \"med_" << key << "\": " << (d ? format_double(d->median) : "null") << ",\n";
    os << "  \"max_" << key << "\": " << (d ? format_double(d->max) : "null") << ",\n";
}
std::string opt_cell(const std::optional<DistanceSummary>& d, double DistanceSummary::*field) {
    return d ? format_double((*d).*field) : "";
}
}  // namespace

std::string metadata_json(const DatasetMetadata& m) {
    std::ostringstream os;
    os << "{\n  \"name\": \"" << m.name << "\",\n";
    os << "  \"f\": " << m.f << ",\n  \"n_samples\": " << m.n_samples << ",\n";
    os << "  \"n_neg\": " << m.n_neg << ",\n  \"n_pos\": " << m.n_pos << ",\n";
    os << "  \"ratio\": " << format_double(m.ratio) << ",\n";
    triple_json(os, "dn", m.d_n);
    triple_json(os, "dp", m.d_p);
    triple_json(os, "dnp", std::optional<DistanceSummary>(m.d_np));
    os << "  \"subsampled\": " << (m.subsampled ? "true" : "false") << ",\n";
    os << "  \"row_cap\": " << m.row_cap << "\n}\n";
    return os.str();
}

std::string metadata_csv_header() {
    return "name,f,n_samples,n_neg,n_pos,ratio,min_dn,med_dn,max_dn,min_dp,med_dp,max_dp,min_dnp,med_dnp,max_dnp,"
           "subsampled";
}

std::string metadata_csv_row(const DatasetMetadata& m) {
    std::ostringstream os;
    os << m.name << ',' << m.f << ',' << m.n_samples << ',' << m.n_neg << ',' << m.n_pos << ','
       << format_double(m.ratio);
    for (const auto* d : {&m.d_n, &m.d_p}) {
        os << ',' << opt_cell(*d, &DistanceSummary::min) << ',' << opt_cell(*d, &DistanceSummary::median) << ','
           << opt_cell(*d, &DistanceSummary::max);
    }
    os << ',' << format_double(m.d_np.min) << ',' << format_double(m.d_np.median) << ','
       << format_double(m.d_np.max) << ',' << (m.subsampled ? 1 : 0);
    return os.str();
}

JacobiResult jacobi_eigen(Matrix a, double tol, int max_sweeps) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw Error("jacobi_eigen: matrix must be square");
    Matrix v = Matrix::Identity(n, n);
    auto off_norm = [&] {
        double s = 0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };
    int sweep = 0;
    for (; sweep < max_sweeps && off_norm() >= tol; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // A <- J^T A J on rows/cols p and q.
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    return {a.diagonal(), v, sweep};
}

Matrix PcaModel::transform(const Matrix& x) const {
    return (x.rowwise() - mean.transpose()) * components;
}

Matrix PcaModel::inverse_transform(const Matrix& z) const {
    return (z * components.transpose()).rowwise() + mean.transpose();
}

PcaModel pca_fit(const Matrix& x, std::size_t k) {
    const auto f = static_cast<std::size_t>(x.cols());
    if (k < 1 || k > f) throw Error("pca: k must lie in [1, " + std::to_string(f) + "]");
    if (x.rows() < 2) throw Error("pca: need at least 2 rows");
    PcaModel model;
    model.mean = x.colwise().mean().transpose();
    const Matrix centered = x.rowwise() - model.mean.transpose();
    const Matrix cov = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    auto eig = jacobi_eigen(cov);
    model.sweeps = eig.sweeps;

    std::vector<Eigen::Index> order(f);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return eig.eigenvalues[a] > eig.eigenvalues[b]; });
    model.components.resize(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(k));
    model.eigenvalues.resize(static_cast<Eigen::Index>(k));
    for (std::size_t c = 0; c < k; ++c) {
        Vector vec = eig.eigenvectors.col(order[c]);
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < vec.size(); ++i)
            if (std::abs(vec[i]) > std::abs(vec[arg])) arg = i;
        if (vec[arg] < 0) vec = -vec;
        model.components.col(static_cast<Eigen::Index>(c)) = vec;
        model.eigenvalues[static_cast<Eigen::Index>(c)] = eig.eigenvalues[order[c]];
    }
    return model;
}

TabularDataset pca_project(const TabularDataset& ds, std::size_t k) {
    auto model = pca_fit(ds.features, k);
    TabularDataset out;
    out.name = ds.name;
    out.features = model.transform(ds.features);
    out.labels = ds.labels;
    out.origin = ds.origin;
    for (std::size_t c = 0; c < k; ++c) out.feature_names.push_back("pc" + std::to_string(c + 1));
    return out;
}

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = {
        {"arrhythmia", 278, 452, 427, 25, 17.08, {0.79, 2.65, 7.10}, {0.88, 2.43, 3.60}, {1.02, 2.52, 5.70}},
        {"car_eval_34", 21, 1728, 1594, 134, 11.90, {1.41, 2.83, 3.46}, {1.41, 2.45, 3.46}, {1.41, 2.83, 3.46}},
        {"car_eval_4", 21, 1728, 1663, 65, 25.58, {1.41, 2.83, 3.46}, {1.41, 2.45, 3.16}, {1.41, 2.83, 3.46}},
        {"coil_2000", 85, 9822, 9236, 586, 15.76, {0.00, 2.06, 4.65}, {0.00, 2.09, 3.89}, {0.00, 2.12, 4.30}},
        {"isolet", 617, 7797, 7197, 600, 12.00, {1.74, 7.79, 13.11}, {2.46, 5.84, 11.13}, {2.86, 7.27, 12.58}},
        {"libras_move", 90, 360, 336, 24, 14.00, {0.00, 2.88, 5.89}, {0.71, 2.85, 4.69}, {0.73, 3.11, 5.13}},
        {"oil", 49, 937, 896, 41, 21.85, {0.13, 1.66, 4.75}, {0.24, 1.55, 2.95}, {0.17, 1.65, 4.37}},
        {"optical_digits", 64, 5620, 5066, 554, 9.14, {0.38, 3.13, 4.94}, {0.49, 2.33, 3.99}, {0.97, 2.93, 4.54}},
        {"ozone_level", 72, 2536, 2463, 73, 33.74, {0.33, 2.15, 5.35}, {0.43, 1.38, 3.85}, {0.38, 1.99, 5.35}},
        {"protein_homo", 74, 145751, 144455, 1296, 111.46, {0.00, 0.78, 4.85}, {0.00, 1.01, 4.11},
         {0.26, 1.08, 5.34}},
        {"satimage", 36, 6435, 5809, 626, 9.28, {0.11, 1.45, 3.90}, {0.13, 0.65, 2.19}, {0.15, 1.16, 3.61}},
        {"scene", 294, 2407, 2230, 177, 12.60, {0.00, 4.34, 9.48}, {0.00, 4.00, 7.01}, {0.00, 4.25, 9.26}},
        {"sick_euthyroid", 42, 3163, 2870, 293, 9.80, {0.00, 2.03, 4.95}, {0.00, 1.44, 3.49}, {0.02, 1.79, 4.93}},
        {"solar_flare_m0", 32, 1389, 1321, 68, 19.43, {0.00, 2.83, 4.47}, {0.00, 3.16, 4.47}, {0.00, 3.16, 4.47}},
        {"spectrometer", 93, 531, 486, 45, 10.80, {0.11, 1.20, 6.02}, {0.14, 3.21, 6.66}, {0.25, 2.17, 7.04}},
        {"thyroid_sick", 52, 3772, 3541, 231, 15.33, {0.00, 2.45, 5.14}, {0.02, 1.79, 4.09}, {0.03, 2.10, 4.96}},
        {"us_crime", 100, 1994, 1844, 150, 12.29, {0.49, 2.56, 5.93}, {0.84, 2.82, 5.86}, {0.71, 3.16, 6.22}},
        {"webpage", 300, 34780, 33799, 981, 34.45, {1.00, 4.69, 12.08}, {1.00, 4.36, 9.17}, {0.00, 4.58, 11.79}},
        {"yeast_ml8", 103, 2417, 2239, 178, 12.58, {0.19, 1.84, 2.55}, {0.98, 1.81, 2.44}, {0.85, 1.83, 2.53}},
        {"bankruptcy", 94, 6819, 6599, 220, 30.00, {0.07, 1.39, 3.61}, {0.18, 1.42, 3.41}, {0.18, 1.44, 3.65}},
    };
    return entries;
}

const CatalogEntry* find_catalog_entry(const std::string& name) {
    for (const auto& e : catalog())
        if (e.name == name) return &e;
    return nullptr;
}

std::vector<std::string> catalog_mismatches(const TabularDataset& ds, const CatalogEntry& entry) {
    std::vector<std::string> out;
    auto check = [&](const char* what, std::size_t got, std::size_t want) {
        if (got != want)
            out.push_back(std::string(what) + ": computed " + std::to_string(got) + ", catalog " + std::to_string(want));
    };
    check("f", ds.f(), entry.f);
    check("n_samples", ds.rows(), entry.n_samples);
    check("n_neg", ds.n_neg(), entry.n_neg);
    check("n_pos", ds.n_pos(), entry.n_pos);
    if (ds.n_pos() > 0) {
        const double ratio = static_cast<double>(ds.n_neg()) / static_cast<double>(ds.n_pos());
        if (std::llround(ratio * 100) != std::llround(entry.ratio * 100))
            out.push_back("ratio: computed " + format_double(ratio) + ", catalog " + format_double(entry.ratio));
    }
    return out;
}

}  // namespace qcaan
