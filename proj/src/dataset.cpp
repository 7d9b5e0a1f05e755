#include "lmcar/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lmcar/numio.hpp"
#include "lmcar/rng.hpp"
#include "csv.hpp"

namespace lmcar {

using nlohmann::json;

namespace {

std::optional<double> try_parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string join_issues(const std::vector<std::string>& issues) {
    std::string out = "dataset validation failed:";
    for (const auto& s : issues) out += "\n  - " + s;
    return out;
}

// Numerically zero spread: below this the column is treated as constant.
bool is_zero_spread(double sd, double mean) {
    return sd <= 1e-12 * std::max(1.0, std::abs(mean));
}

struct LoadedFiles {
    Dataset ds;
    bool usable = false;
};

LoadedFiles parse_files(const std::filesystem::path& features_path,
                        const std::filesystem::path& labels_path,
                        const std::filesystem::path& groups_path,
                        std::vector<std::string>& issues) {
    LoadedFiles out;
    const std::string fname = features_path.filename().string();
    const std::string lname = labels_path.filename().string();
    const std::string gname = groups_path.filename().string();

    auto ftab = detail::read_csv(features_path, issues);
    auto ltab = detail::read_csv(labels_path, issues);

    // groups
    {
        std::ifstream in(groups_path);
        if (!in) {
            issues.push_back("cannot open " + groups_path.string());
        } else {
            try {
                json j = json::parse(in);
                if (!j.is_array()) throw ValidationError("expected a JSON array");
                for (const auto& item : j) {
                    FeatureGroupSpec g;
                    g.name = item.at("name").get<std::string>();
                    g.offset = item.at("offset").get<int>();
                    g.length = item.at("length").get<int>();
                    g.point_mapped = item.at("point_mapped").get<bool>();
                    out.ds.groups.push_back(std::move(g));
                }
            } catch (const std::exception& e) {
                issues.push_back(gname + ": " + e.what());
            }
        }
    }

    if (!ftab.header.empty()) {
        if (ftab.header.size() < 2) {
            issues.push_back(fname + ": header needs an id column and at least one dimension");
        } else {
            out.ds.dimension_names.assign(ftab.header.begin() + 1, ftab.header.end());
        }
    }
    if (!ltab.header.empty()) {
        if (ltab.header.size() < 2) {
            issues.push_back(lname + ": header needs an id column and at least one affordance");
        } else {
            out.ds.affordance_names.assign(ltab.header.begin() + 1, ltab.header.end());
        }
    }

    const int n = static_cast<int>(ftab.rows.size());
    const int dims = static_cast<int>(out.ds.dimension_names.size());
    const int affs = static_cast<int>(out.ds.affordance_names.size());
    if (static_cast<int>(ltab.rows.size()) != n) {
        issues.push_back(lname + " has " + std::to_string(ltab.rows.size()) +
                         " data rows but " + fname + " has " + std::to_string(n));
    }
    if (n == 0) issues.push_back(fname + ": no data rows");

    if (!issues.empty()) return out;

    out.ds.features.resize(n, dims);
    out.ds.labels.resize(n, affs);
    out.ds.instance_ids.resize(n);

    for (int i = 0; i < n; ++i) {
        const auto& row = ftab.rows[static_cast<std::size_t>(i)];
        const int line = i + 2; // 1-based, header is line 1
        if (static_cast<int>(row.size()) != dims + 1) {
            issues.push_back(fname + " row " + std::to_string(line) + " has " +
                             std::to_string(row.size()) + " fields, expected " +
                             std::to_string(dims + 1));
            continue;
        }
        out.ds.instance_ids[static_cast<std::size_t>(i)] = row[0];
        for (int j = 0; j < dims; ++j) {
            auto v = try_parse_double(row[static_cast<std::size_t>(j + 1)]);
            if (!v) {
                issues.push_back(fname + " row " + std::to_string(line) + ", column '" +
                                 out.ds.dimension_names[static_cast<std::size_t>(j)] +
                                 "': cannot parse '" + row[static_cast<std::size_t>(j + 1)] + "'");
            } else if (!std::isfinite(*v)) {
                issues.push_back(fname + " row " + std::to_string(line) + ", column '" +
                                 out.ds.dimension_names[static_cast<std::size_t>(j)] +
                                 "': non-finite value");
            } else {
                out.ds.features(i, j) = *v;
            }
        }
    }

    for (int i = 0; i < n; ++i) {
        const auto& row = ltab.rows[static_cast<std::size_t>(i)];
        const int line = i + 2;
        if (static_cast<int>(row.size()) != affs + 1) {
            issues.push_back(lname + " row " + std::to_string(line) + " has " +
                             std::to_string(row.size()) + " fields, expected " +
                             std::to_string(affs + 1));
            continue;
        }
        if (row[0] != out.ds.instance_ids[static_cast<std::size_t>(i)]) {
            issues.push_back(lname + " row " + std::to_string(line) + ": instance id '" +
                             row[0] + "' does not match " + fname + " id '" +
                             out.ds.instance_ids[static_cast<std::size_t>(i)] + "'");
        }
        for (int j = 0; j < affs; ++j) {
            const std::string& cell = row[static_cast<std::size_t>(j + 1)];
            if (cell == "0") {
                out.ds.labels(i, j) = 0;
            } else if (cell == "1") {
                out.ds.labels(i, j) = 1;
            } else {
                issues.push_back(lname + " row " + std::to_string(line) + ", column '" +
                                 out.ds.affordance_names[static_cast<std::size_t>(j)] +
                                 "': label must be 0 or 1, got '" + cell + "'");
            }
        }
    }

    if (!issues.empty()) return out;

    for (int j = 0; j < affs; ++j) {
        const int pos = out.ds.labels.col(j).sum();
        if (pos == 0 || pos == n) {
            issues.push_back(lname + " column '" +
                             out.ds.affordance_names[static_cast<std::size_t>(j)] +
                             "': degenerate affordance column (all " +
                             (pos == 0 ? std::string("0") : std::string("1")) + ")");
        }
    }

    {
        std::vector<std::string> gissues;
        check_groups(out.ds.groups, dims, gissues);
        for (auto& s : gissues) issues.push_back(gname + ": " + s);
    }

    out.usable = issues.empty();
    return out;
}

void write_csv_matrix(std::ofstream& out, const std::vector<std::string>& ids,
                      const std::vector<std::string>& col_names,
                      const Eigen::MatrixXd& m) {
    out << "id";
    for (const auto& c : col_names) out << ',' << c;
    out << '\n';
    for (int i = 0; i < m.rows(); ++i) {
        out << ids[static_cast<std::size_t>(i)];
        for (int j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

} // namespace

int Dataset::affordance_index(const std::string& name) const {
    for (std::size_t i = 0; i < affordance_names.size(); ++i) {
        if (affordance_names[i] == name) return static_cast<int>(i);
    }
    throw ValidationError("unknown affordance '" + name + "'");
}

void check_groups(const std::vector<FeatureGroupSpec>& groups, int dims,
                  std::vector<std::string>& issues) {
    if (groups.empty()) {
        issues.push_back("no feature groups defined");
        return;
    }
    int prev_end = 0;
    std::string prev_name;
    std::set<std::string> names;
    bool layout_ok = true;
    for (const auto& g : groups) {
        if (!names.insert(g.name).second) {
            issues.push_back("duplicate group name '" + g.name + "'");
        }
        if (g.length < 1) {
            issues.push_back("group '" + g.name + "': length must be >= 1");
            layout_ok = false;
            continue;
        }
        if (g.offset < prev_end) {
            if (prev_name.empty()) {
                issues.push_back("group '" + g.name + "': negative offset");
            } else {
                issues.push_back("group '" + g.name + "' (offset " +
                                 std::to_string(g.offset) + ") overlaps or reorders with group '" +
                                 prev_name + "' ending at " + std::to_string(prev_end));
            }
            layout_ok = false;
        } else if (g.offset > prev_end) {
            issues.push_back("groups leave dimensions [" + std::to_string(prev_end) + ", " +
                             std::to_string(g.offset) + ") uncovered");
            layout_ok = false;
        }
        prev_end = g.offset + g.length;
        prev_name = g.name;
    }
    if (layout_ok && prev_end != dims) {
        issues.push_back("groups cover [0, " + std::to_string(prev_end) +
                         ") but the dataset has " + std::to_string(dims) + " dimensions");
    }
}

void check_groups(const std::vector<FeatureGroupSpec>& groups, int dims) {
    std::vector<std::string> issues;
    check_groups(groups, dims, issues);
    if (!issues.empty()) throw ValidationError(join_issues(issues));
}

std::vector<std::string> validate_dataset_files(
    const std::filesystem::path& features_path,
    const std::filesystem::path& labels_path,
    const std::filesystem::path& groups_path) {
    std::vector<std::string> issues;
    parse_files(features_path, labels_path, groups_path, issues);
    return issues;
}

Dataset load_dataset(const std::filesystem::path& features_path,
                     const std::filesystem::path& labels_path,
                     const std::filesystem::path& groups_path) {
    std::vector<std::string> issues;
    auto loaded = parse_files(features_path, labels_path, groups_path, issues);
    if (!issues.empty()) throw ValidationError(join_issues(issues));
    loaded.ds.standardized = false;
    return std::move(loaded.ds);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& features_path,
                  const std::filesystem::path& labels_path,
                  const std::filesystem::path& groups_path) {
    {
        std::ofstream out(features_path);
        if (!out) throw ValidationError("cannot write " + features_path.string());
        write_csv_matrix(out, ds.instance_ids, ds.dimension_names, ds.features);
    }
    {
        std::ofstream out(labels_path);
        if (!out) throw ValidationError("cannot write " + labels_path.string());
        out << "id";
        for (const auto& c : ds.affordance_names) out << ',' << c;
        out << '\n';
        for (int i = 0; i < ds.labels.rows(); ++i) {
            out << ds.instance_ids[static_cast<std::size_t>(i)];
            for (int j = 0; j < ds.labels.cols(); ++j) out << ',' << ds.labels(i, j);
            out << '\n';
        }
    }
    {
        json j = json::array();
        for (const auto& g : ds.groups) {
            j.push_back({{"name", g.name},
                         {"offset", g.offset},
                         {"length", g.length},
                         {"point_mapped", g.point_mapped}});
        }
        std::ofstream out(groups_path);
        if (!out) throw ValidationError("cannot write " + groups_path.string());
        out << j.dump(2) << '\n';
    }
}

std::pair<Dataset, StandardizationParams> standardize(const Dataset& ds) {
    if (ds.standardized) throw ValidationError("dataset is already standardized");
    const int n = ds.n();
    const int dims = ds.dim();
    if (n == 0) throw ValidationError("cannot standardize an empty dataset");

    StandardizationParams params;
    params.mean.resize(dims);
    params.std.resize(dims);

    Dataset out = ds;
    for (int j = 0; j < dims; ++j) {
        const double mu = ds.features.col(j).mean();
        const double var = (ds.features.col(j).array() - mu).square().sum() / n;
        const double sd = std::sqrt(var);
        params.mean(j) = mu;
        if (is_zero_spread(sd, mu)) {
            params.std(j) = 1.0;
            out.features.col(j).setZero();
        } else {
            params.std(j) = sd;
            out.features.col(j) = (ds.features.col(j).array() - mu) / sd;
        }
    }
    out.standardized = true;
    return {std::move(out), std::move(params)};
}

Dataset apply_standardization(const Dataset& ds,
                              const StandardizationParams& params) {
    if (params.mean.size() != ds.dim()) {
        throw ValidationError("standardization parameters have dimension " +
                              std::to_string(params.mean.size()) + ", dataset has " +
                              std::to_string(ds.dim()));
    }
    Dataset out = ds;
    out.features = (ds.features.rowwise() - params.mean.transpose()).array().rowwise() /
                   params.std.transpose().array();
    out.standardized = true;
    return out;
}

Eigen::VectorXd apply_standardization(const Eigen::VectorXd& x,
                                      const StandardizationParams& params) {
    if (params.mean.size() != x.size()) {
        throw ValidationError("standardization parameters do not match query dimension");
    }
    return (x - params.mean).cwiseQuotient(params.std);
}

namespace {

std::pair<std::vector<int>, std::vector<int>> class_members(const Dataset& ds,
                                                            int affordance) {
    if (affordance < 0 || affordance >= ds.affordance_count()) {
        throw ValidationError("affordance index out of range");
    }
    std::vector<int> pos, neg;
    for (int i = 0; i < ds.n(); ++i) {
        (ds.labels(i, affordance) == 1 ? pos : neg).push_back(i);
    }
    return {std::move(pos), std::move(neg)};
}

} // namespace

SplitIndices split_indices(const Dataset& ds, int affordance, double ratio,
                           std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ValidationError("split ratio must be in (0, 1)");
    }
    auto [pos, neg] = class_members(ds, affordance);
    if (pos.size() < 2 || neg.size() < 2) {
        throw ValidationError("stratified split needs at least 2 positives and 2 negatives, got " +
                              std::to_string(pos.size()) + " / " + std::to_string(neg.size()));
    }
    Rng rng(seed);
    SplitIndices out;
    for (auto* cls : {&pos, &neg}) {
        const int n_cls = static_cast<int>(cls->size());
        const int n_train = std::clamp(
            static_cast<int>(std::llround(ratio * n_cls)), 1, n_cls - 1);
        rng.shuffle(*cls);
        out.train.insert(out.train.end(), cls->begin(), cls->begin() + n_train);
        out.test.insert(out.test.end(), cls->begin() + n_train, cls->end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, int affordance, double ratio,
                                  std::uint64_t seed) {
    auto idx = split_indices(ds, affordance, ratio, seed);
    return {subset(ds, idx.train), subset(ds, idx.test)};
}

std::vector<FoldIndices> kfold(const Dataset& ds, int affordance, int k,
                               std::uint64_t seed) {
    if (k < 2) throw ValidationError("kfold needs k >= 2");
    auto [pos, neg] = class_members(ds, affordance);
    if (static_cast<int>(pos.size()) < k || static_cast<int>(neg.size()) < k) {
        throw ValidationError("kfold needs at least k members per class, got " +
                              std::to_string(pos.size()) + " positives and " +
                              std::to_string(neg.size()) + " negatives for k=" +
                              std::to_string(k));
    }
    Rng rng(seed);
    rng.shuffle(pos);
    rng.shuffle(neg);

    std::vector<std::vector<int>> val(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < pos.size(); ++i) {
        val[i % static_cast<std::size_t>(k)].push_back(pos[i]);
    }
    for (std::size_t i = 0; i < neg.size(); ++i) {
        val[i % static_cast<std::size_t>(k)].push_back(neg[i]);
    }

    std::vector<FoldIndices> out(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        auto& fold = out[static_cast<std::size_t>(f)];
        fold.validation = val[static_cast<std::size_t>(f)];
        std::sort(fold.validation.begin(), fold.validation.end());
        for (int i = 0; i < ds.n(); ++i) {
            if (!std::binary_search(fold.validation.begin(), fold.validation.end(), i)) {
                fold.train.push_back(i);
            }
        }
    }
    return out;
}

Dataset subset(const Dataset& ds, const std::vector<int>& rows) {
    Dataset out;
    out.affordance_names = ds.affordance_names;
    out.dimension_names = ds.dimension_names;
    out.groups = ds.groups;
    out.standardized = ds.standardized;
    out.features.resize(static_cast<int>(rows.size()), ds.dim());
    out.labels.resize(static_cast<int>(rows.size()), ds.affordance_count());
    out.instance_ids.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const int i = rows[r];
        if (i < 0 || i >= ds.n()) throw ValidationError("subset row index out of range");
        out.features.row(static_cast<int>(r)) = ds.features.row(i);
        out.labels.row(static_cast<int>(r)) = ds.labels.row(i);
        out.instance_ids.push_back(ds.instance_ids[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::pair<Dataset, std::vector<int>> make_synthetic(const SyntheticSpec& spec) {
    if (spec.dims < 1) throw ValidationError("synthetic spec: D must be >= 1");
    if (spec.n_per_class[0] < 1 || spec.n_per_class[1] < 1) {
        throw ValidationError("synthetic spec: both class counts must be >= 1");
    }
    if (spec.informative_dims.empty()) {
        throw ValidationError("synthetic spec: informative_dims must be nonempty "
                              "(separation must act somewhere)");
    }
    if (!(spec.class_separation > 0.0)) {
        throw ValidationError("synthetic spec: class_separation must be > 0");
    }
    if (spec.noise_std < 0.0) {
        throw ValidationError("synthetic spec: noise_std must be >= 0");
    }
    std::set<int> informative;
    for (int d : spec.informative_dims) {
        if (d < 0 || d >= spec.dims) {
            throw ValidationError("synthetic spec: informative dimension " +
                                  std::to_string(d) + " outside [0, " +
                                  std::to_string(spec.dims) + ")");
        }
        if (!informative.insert(d).second) {
            throw ValidationError("synthetic spec: duplicate informative dimension " +
                                  std::to_string(d));
        }
    }

    const int n = spec.n_per_class[0] + spec.n_per_class[1];
    Dataset ds;
    ds.features.resize(n, spec.dims);
    ds.labels.resize(n, 1);
    ds.affordance_names = {"target"};
    ds.groups = {{"all", 0, spec.dims, false}};
    ds.instance_ids.reserve(static_cast<std::size_t>(n));
    ds.dimension_names.reserve(static_cast<std::size_t>(spec.dims));
    for (int j = 0; j < spec.dims; ++j) ds.dimension_names.push_back("dim_" + std::to_string(j));

    Rng rng(spec.seed);
    for (int i = 0; i < n; ++i) {
        const int cls = i < spec.n_per_class[0] ? 0 : 1;
        const double shift = (cls == 0 ? -0.5 : 0.5) * spec.class_separation;
        ds.labels(i, 0) = cls;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "synth_%04d", i);
        ds.instance_ids.emplace_back(buf);
        for (int j = 0; j < spec.dims; ++j) {
            const double base = informative.count(j) ? shift : 0.0;
            ds.features(i, j) = base + spec.noise_std * rng.next_normal();
        }
    }
    return {std::move(ds), spec.informative_dims};
}

PointCloudFeatureMap load_point_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const std::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    PointCloudFeatureMap map;
    try {
        map.instance_id = j.at("instance_id").get<std::string>();
        const auto& pts = j.at("points");
        if (!pts.is_array() || pts.empty()) {
            throw ValidationError("points must be a nonempty array");
        }
        map.points.resize(static_cast<int>(pts.size()), 3);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& p = pts[i];
            if (!p.is_array() || p.size() != 3) {
                throw ValidationError("point " + std::to_string(i) + " must have 3 coordinates");
            }
            for (int c = 0; c < 3; ++c) {
                map.points(static_cast<int>(i), c) = p[static_cast<std::size_t>(c)].get<double>();
            }
        }
        for (const auto& [name, arr] : j.at("assignments").items()) {
            std::vector<int> bins;
            bins.reserve(arr.size());
            for (const auto& b : arr) bins.push_back(b.get<int>());
            map.assignments[name] = std::move(bins);
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return map;
}

void save_point_map(const PointCloudFeatureMap& map,
                    const std::filesystem::path& path) {
    json pts = json::array();
    for (int i = 0; i < map.points.rows(); ++i) {
        pts.push_back({map.points(i, 0), map.points(i, 1), map.points(i, 2)});
    }
    json assignments = json::object();
    for (const auto& [name, bins] : map.assignments) assignments[name] = bins;
    json j{{"instance_id", map.instance_id},
           {"points", pts},
           {"assignments", assignments}};
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::vector<FeatureGroupSpec> load_groups(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<FeatureGroupSpec> groups;
    try {
        json j = json::parse(in);
        if (!j.is_array()) throw ValidationError("expected a JSON array");
        for (const auto& item : j) {
            groups.push_back({item.at("name").get<std::string>(),
                              item.at("offset").get<int>(),
                              item.at("length").get<int>(),
                              item.at("point_mapped").get<bool>()});
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return groups;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    SyntheticSpec spec;
    try {
        json j = json::parse(in);
        const auto& npc = j.at("n_per_class");
        if (!npc.is_array() || npc.size() != 2) {
            throw ValidationError("n_per_class must be an array of two counts");
        }
        spec.n_per_class = {npc[0].get<int>(), npc[1].get<int>()};
        spec.dims = j.at("D").get<int>();
        spec.informative_dims = j.at("informative_dims").get<std::vector<int>>();
        spec.class_separation = j.at("class_separation").get<double>();
        spec.noise_std = j.at("noise_std").get<double>();
        spec.seed = j.at("seed").get<std::uint64_t>();
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return spec;
}

} // namespace lmcar
