#include "lmcar/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <thread>
#include <utility>

#include "json.hpp"
#include "lmcar/analysis.hpp"
#include "lmcar/errors.hpp"
#include "lmcar/model_io.hpp"
#include "lmcar/numio.hpp"
#include "lmcar/projection.hpp"
#include "lmcar/rng.hpp"

namespace lmcar {

namespace {

using nlohmann::json;

namespace fs = std::filesystem;

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json read_json_file(const fs::path& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError(std::string("cannot open ") + what + " '" +
                              path.string() + "'");
    }
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ValidationError(std::string(what) + " '" + path.string() +
                              "': " + e.what());
    }
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot open '" + path.string() +
                              "' for writing");
    }
    return out;
}

void check_experiment_config(const ExperimentConfig& cfg) {
    if (cfg.features.empty() || cfg.labels.empty() || cfg.groups.empty()) {
        throw ValidationError("features, labels, and groups paths are required");
    }
    if (cfg.out_dir.empty()) {
        throw ValidationError("out_dir is required");
    }
    if (cfg.n_splits < 1) {
        throw ValidationError("n_splits must be at least 1");
    }
    if (!(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0)) {
        throw ValidationError("split_ratio must lie in (0, 1)");
    }
    if (cfg.cv_folds < 2) {
        throw ValidationError("cv_folds must be at least 2");
    }
    if (cfg.c_grid.empty() || cfg.lambda_grid.empty()) {
        throw ValidationError("c_grid and lambda_grid must be nonempty");
    }
    if (cfg.threads < 1) {
        throw ValidationError("threads must be at least 1");
    }
    if (!(cfg.kept_rel_threshold > 0.0 && cfg.kept_rel_threshold < 1.0)) {
        throw ValidationError("kept_rel_threshold must lie in (0, 1)");
    }
}

struct TaskResult {
    TrainedModel model;
    EvalReport lmca;
    EvalReport baseline;
    MagnitudeProfile profile;
};

struct Task {
    int affordance = 0;
    int split = 0;
    std::uint64_t seed = 0;
};

TaskResult run_task(const Dataset& ds, const ExperimentConfig& cfg,
                    const std::vector<TrainConfig>& grid,
                    const std::vector<int>& pca_grid,
                    const std::optional<StandardizationParams>& global_params,
                    const Task& task) {
    auto [train_raw, test_raw] =
        split(ds, task.affordance, cfg.split_ratio, task.seed);
    const std::uint64_t cv_seed = derive_seed(task.seed, "cv", 0);

    TrainConfig best = cross_validate(train_raw, task.affordance, grid,
                                      cfg.cv_folds, cv_seed, global_params);
    best.seed = derive_seed(task.seed, "train", 0);

    Dataset train_std;
    StandardizationParams params;
    if (global_params) {
        params = *global_params;
        train_std = apply_standardization(train_raw, params);
    } else {
        std::tie(train_std, params) = standardize(train_raw);
    }

    TaskResult result;
    result.model = train(train_std, task.affordance, best, params);
    result.lmca =
        evaluate(result.model, test_raw.features,
                 test_raw.labels.col(task.affordance), cfg.kept_rel_threshold);

    const int best_dim =
        cross_validate_pca_dim(train_raw, task.affordance, pca_grid,
                               cfg.train.k, cfg.cv_folds, cv_seed,
                               global_params);
    const TrainedModel baseline = make_pca_baseline(
        train_std, task.affordance, best_dim, cfg.train.k, params);
    result.baseline =
        evaluate(baseline, test_raw.features,
                 test_raw.labels.col(task.affordance), cfg.kept_rel_threshold);

    result.profile = magnitude_profile(result.model.transform.matrix);
    return result;
}

void write_runs_csv(const fs::path& path, const std::vector<RunRecord>& runs) {
    auto out = open_out(path);
    out << "affordance,method,split_seed,f1,accuracy,tp,fp,tn,fn,"
           "kept_fraction\n";
    for (const auto& r : runs) {
        out << r.affordance << ',' << r.method << ',' << r.split_seed << ','
            << format_double(r.report.f1) << ','
            << format_double(r.report.accuracy) << ',' << r.report.tp << ','
            << r.report.fp << ',' << r.report.tn << ',' << r.report.fn << ','
            << format_double(r.report.kept_fraction) << '\n';
    }
}

void write_aggregate_csv(const fs::path& path,
                         const std::vector<std::string>& affordances,
                         const std::vector<RunRecord>& runs) {
    auto out = open_out(path);
    out << "affordance,method,mean_f1,mean_accuracy,mean_kept_fraction\n";
    for (const auto& name : affordances) {
        for (const char* method : {"lmca-r", "knn"}) {
            double f1 = 0.0;
            double acc = 0.0;
            double kept = 0.0;
            int count = 0;
            for (const auto& r : runs) {
                if (r.affordance == name && r.method == method) {
                    f1 += r.report.f1;
                    acc += r.report.accuracy;
                    kept += r.report.kept_fraction;
                    count++;
                }
            }
            out << name << ',' << method << ',' << format_double(f1 / count)
                << ',' << format_double(acc / count) << ','
                << format_double(kept / count) << '\n';
        }
    }
}

std::string split_file_name(int split) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "split_%03d.json", split);
    return buf;
}

/// Affordance name -> per-split profiles, loaded from models_dir, which
/// holds one subdirectory per affordance.
std::map<std::string, std::vector<MagnitudeProfile>> load_profiles(
    const fs::path& models_dir) {
    if (!fs::is_directory(models_dir)) {
        throw ValidationError("'" + models_dir.string() +
                              "' is not a directory");
    }
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(models_dir)) {
        if (entry.is_directory()) {
            subdirs.push_back(entry.path());
        }
    }
    std::sort(subdirs.begin(), subdirs.end());
    std::map<std::string, std::vector<MagnitudeProfile>> out;
    for (const auto& dir : subdirs) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        std::vector<MagnitudeProfile> profiles;
        for (const auto& file : files) {
            profiles.push_back(
                magnitude_profile(load_model(file).transform.matrix));
        }
        if (!profiles.empty()) {
            out[dir.filename().string()] = std::move(profiles);
        }
    }
    if (out.empty()) {
        throw ValidationError("no models found under '" + models_dir.string() +
                              "'");
    }
    return out;
}

} // namespace

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    const json j = read_json_file(path, "config file");
    if (!j.is_object()) {
        throw ValidationError("config file '" + path.string() +
                              "' must hold a JSON object");
    }
    ExperimentConfig cfg;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "features") {
                cfg.features = value.get<std::string>();
            } else if (key == "labels") {
                cfg.labels = value.get<std::string>();
            } else if (key == "groups") {
                cfg.groups = value.get<std::string>();
            } else if (key == "out_dir") {
                cfg.out_dir = value.get<std::string>();
            } else if (key == "affordances") {
                cfg.affordances = value.get<std::vector<std::string>>();
            } else if (key == "n_splits") {
                cfg.n_splits = value.get<int>();
            } else if (key == "split_ratio") {
                cfg.split_ratio = value.get<double>();
            } else if (key == "cv_folds") {
                cfg.cv_folds = value.get<int>();
            } else if (key == "c_grid") {
                cfg.c_grid = value.get<std::vector<double>>();
            } else if (key == "lambda_grid") {
                cfg.lambda_grid = value.get<std::vector<double>>();
            } else if (key == "pca_grid") {
                cfg.pca_grid = value.get<std::vector<int>>();
            } else if (key == "k") {
                cfg.train.k = value.get<int>();
            } else if (key == "d") {
                cfg.train.d = value.get<int>();
            } else if (key == "max_epochs") {
                cfg.train.max_epochs = value.get<int>();
            } else if (key == "init_step") {
                cfg.train.init_step = value.get<double>();
            } else if (key == "tol") {
                cfg.train.tol = value.get<double>();
            } else if (key == "norm_eps") {
                cfg.train.norm_eps = value.get<double>();
            } else if (key == "master_seed") {
                cfg.master_seed = value.get<std::uint64_t>();
            } else if (key == "threads") {
                cfg.threads = value.get<int>();
            } else if (key == "global_standardization") {
                cfg.global_standardization = value.get<bool>();
            } else if (key == "kept_rel_threshold") {
                cfg.kept_rel_threshold = value.get<double>();
            } else {
                throw ValidationError("config file '" + path.string() +
                                      "': unknown field '" + key + "'");
            }
        } catch (const json::exception& e) {
            throw ValidationError("config file '" + path.string() +
                                  "', field '" + key + "': " + e.what());
        }
    }
    return cfg;
}

std::vector<TrainConfig> build_grid(const ExperimentConfig& config) {
    std::vector<TrainConfig> grid;
    for (double c : config.c_grid) {
        for (double lambda : config.lambda_grid) {
            TrainConfig point = config.train;
            point.c = c;
            point.lambda = lambda;
            grid.push_back(point);
        }
    }
    return grid;
}

std::vector<int> default_pca_grid(int dims) {
    std::vector<int> grid;
    for (int d = 0; d <= std::min(dims, 20); ++d) {
        grid.push_back(d);
    }
    return grid;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    check_experiment_config(config);
    const Dataset ds =
        load_dataset(config.features, config.labels, config.groups);

    std::vector<int> aff_idx;
    if (config.affordances.empty()) {
        for (int a = 0; a < ds.affordance_count(); ++a) {
            aff_idx.push_back(a);
        }
    } else {
        for (const auto& name : config.affordances) {
            aff_idx.push_back(ds.affordance_index(name));
        }
    }

    std::optional<StandardizationParams> global_params;
    if (config.global_standardization) {
        global_params = standardize(ds).second;
    }

    const std::vector<TrainConfig> grid = build_grid(config);
    const std::vector<int> pca_grid =
        config.pca_grid.empty() ? default_pca_grid(ds.dim()) : config.pca_grid;
    for (int d : pca_grid) {
        if (d < 0 || d > ds.dim()) {
            throw ValidationError("pca_grid entry " + std::to_string(d) +
                                  " outside [0, " + std::to_string(ds.dim()) +
                                  "]");
        }
    }

    const std::string started = utc_now();

    std::vector<Task> tasks;
    for (int a : aff_idx) {
        for (int s = 0; s < config.n_splits; ++s) {
            tasks.push_back(Task{
                a, s,
                derive_seed(config.master_seed, ds.affordance_names[a], s)});
        }
    }

    std::vector<TaskResult> results(tasks.size());
    std::vector<std::exception_ptr> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < tasks.size();
             i = next.fetch_add(1)) {
            try {
                results[i] = run_task(ds, config, grid, pca_grid,
                                      global_params, tasks[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    const int thread_count =
        std::min<int>(config.threads, static_cast<int>(tasks.size()));
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < thread_count; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (!failures[i]) {
            continue;
        }
        const std::string where =
            "(affordance '" + ds.affordance_names[tasks[i].affordance] +
            "', split " + std::to_string(tasks[i].split) + "): ";
        try {
            std::rethrow_exception(failures[i]);
        } catch (const ValidationError& e) {
            throw ValidationError(where + e.what());
        } catch (const NumericError& e) {
            throw NumericError(where + e.what());
        }
    }

    ExperimentResult result;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string& name = ds.affordance_names[tasks[i].affordance];
        result.runs.push_back(
            RunRecord{name, "lmca-r", tasks[i].seed, results[i].lmca});
        result.runs.push_back(
            RunRecord{name, "knn", tasks[i].seed, results[i].baseline});
    }

    fs::create_directories(config.out_dir);
    fs::create_directories(config.out_dir / "profiles");
    write_runs_csv(config.out_dir / "runs.csv", result.runs);
    std::vector<std::string> aff_names;
    for (int a : aff_idx) {
        aff_names.push_back(ds.affordance_names[a]);
    }
    write_aggregate_csv(config.out_dir / "aggregate.csv", aff_names,
                        result.runs);

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const std::string& name = ds.affordance_names[tasks[i].affordance];
        const fs::path dir = config.out_dir / "models" / name;
        fs::create_directories(dir);
        save_model(results[i].model, dir / split_file_name(tasks[i].split));
    }
    for (int a : aff_idx) {
        const std::string& name = ds.affordance_names[a];
        auto out = open_out(config.out_dir / "profiles" / (name + ".csv"));
        out << "split,dim,normalized_magnitude\n";
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            if (tasks[i].affordance != a) {
                continue;
            }
            const auto& normalized = results[i].profile.normalized;
            for (Eigen::Index dim = 0; dim < normalized.size(); ++dim) {
                out << tasks[i].split << ',' << dim << ','
                    << format_double(normalized[dim]) << '\n';
            }
        }
    }

    json meta;
    meta["started_at"] = started;
    meta["finished_at"] = utc_now();
    meta["master_seed"] = config.master_seed;
    meta["threads"] = config.threads;
    meta["global_standardization"] = config.global_standardization;
    meta["standardization_convention"] = "population (1/N) std";
    meta["note"] = "timestamps are confined to this file";
    auto meta_out = open_out(config.out_dir / "run_metadata.json");
    meta_out << meta.dump(2) << '\n';

    return result;
}

void write_feature_report(const std::filesystem::path& models_dir,
                          const std::filesystem::path& groups_path,
                          const std::filesystem::path& out_dir) {
    const auto groups = load_groups(groups_path);
    const auto per_affordance = load_profiles(models_dir);
    fs::create_directories(out_dir);

    auto summary = open_out(out_dir / "features_summary.csv");
    summary << "affordance,group,mass,kl_vs_uniform,zero_mass\n";
    for (const auto& [name, profiles] : per_affordance) {
        const MagnitudeProfile averaged = mean_profile(profiles);
        for (const auto& stat : group_summary(averaged, groups).stats) {
            summary << name << ',' << stat.name << ','
                    << format_double(stat.mass) << ','
                    << format_double(stat.kl_vs_uniform) << ','
                    << (stat.zero_mass ? 1 : 0) << '\n';
        }
        auto profile_out = open_out(out_dir / (name + "_profile.csv"));
        profile_out << "dim,mean_normalized_magnitude\n";
        for (Eigen::Index d = 0; d < averaged.normalized.size(); ++d) {
            profile_out << d << ',' << format_double(averaged.normalized[d])
                        << '\n';
        }
    }
}

void write_association_report(const std::filesystem::path& models_dir,
                              const std::filesystem::path& out_dir) {
    const auto per_affordance = load_profiles(models_dir);
    std::map<std::string, GaussianMagnitudeModel> gaussians;
    for (const auto& [name, profiles] : per_affordance) {
        gaussians[name] = fit_gaussian(profiles);
    }
    const AssociationTable table = associate(gaussians);
    fs::create_directories(out_dir);

    auto csv = open_out(out_dir / "association_kl.csv");
    csv << "affordance";
    for (const auto& name : table.names) {
        csv << ',' << name;
    }
    csv << '\n';
    for (std::size_t i = 0; i < table.names.size(); ++i) {
        csv << table.names[i];
        for (std::size_t j = 0; j < table.names.size(); ++j) {
            csv << ','
                << format_double(table.kl(static_cast<Eigen::Index>(i),
                                          static_cast<Eigen::Index>(j)));
        }
        csv << '\n';
    }

    auto txt = open_out(out_dir / "association_top3.txt");
    std::size_t width = std::string("affordance").size();
    for (const auto& name : table.names) {
        width = std::max(width, name.size());
    }
    auto pad = [width](const std::string& s) {
        return s + std::string(width + 2 - s.size(), ' ');
    };
    txt << pad("affordance") << pad("NN1") << pad("NN2") << "NN3\n";
    for (std::size_t i = 0; i < table.names.size(); ++i) {
        txt << pad(table.names[i]);
        for (std::size_t m = 0; m < 3; ++m) {
            const std::string entry =
                m < table.top3[i].size() ? table.top3[i][m] : "-";
            txt << (m == 2 ? entry : pad(entry));
        }
        txt << '\n';
    }
}

void project_clouds(const std::filesystem::path& model_path,
                    const std::filesystem::path& groups_path,
                    const std::vector<std::filesystem::path>& cloud_paths,
                    const std::filesystem::path& out_dir) {
    if (cloud_paths.empty()) {
        throw ValidationError("no point-cloud maps given");
    }
    const TrainedModel model = load_model(model_path);
    const MagnitudeProfile profile =
        magnitude_profile(model.transform.matrix);
    const auto groups = load_groups(groups_path);
    fs::create_directories(out_dir);
    for (const auto& path : cloud_paths) {
        const PointCloudFeatureMap map = load_point_map(path);
        const PointImportance importance =
            point_importance(profile, map, groups);
        export_cloud(map.points, colorize(importance),
                     out_dir / (map.instance_id + ".ply"));
    }
}

void write_synthetic(const std::filesystem::path& spec_path,
                     const std::filesystem::path& out_dir) {
    const SyntheticSpec spec = load_synthetic_spec(spec_path);
    const auto [ds, informative] = make_synthetic(spec);
    fs::create_directories(out_dir);
    save_dataset(ds, out_dir / "features.csv", out_dir / "labels.csv",
                 out_dir / "groups.json");
    json truth;
    truth["informative_dims"] = informative;
    auto out = open_out(out_dir / "ground_truth.json");
    out << truth.dump(2) << '\n';
}

} // namespace lmcar
