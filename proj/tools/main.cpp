// Command-line front end: validate / run / features / associate / project
// / synth. Exit codes: 0 success, 1 data error, 2 numerical failure.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lmcar/errors.hpp"
#include "lmcar/experiment.hpp"

namespace {

struct RunFlags {
    std::string config;
    std::string features;
    std::string labels;
    std::string groups;
    std::string out_dir;
    std::vector<std::string> affordances;
    int n_splits = 0;
    double split_ratio = 0.0;
    int cv_folds = 0;
    std::vector<double> c_grid;
    std::vector<double> lambda_grid;
    std::vector<int> pca_grid;
    int k = 0;
    int d = 0;
    int max_epochs = 0;
    double init_step = 0.0;
    double tol = 0.0;
    double norm_eps = 0.0;
    std::uint64_t master_seed = 0;
    int threads = 0;
    bool global_standardization = false;
    double kept_rel_threshold = 0.0;
};

void add_run_command(CLI::App& app) {
    auto* run = app.add_subcommand(
        "run", "Train and score every (affordance, split) task");
    auto flags = std::make_shared<RunFlags>();
    run->add_option("--config", flags->config,
                    "JSON config; flags below override its fields");
    run->add_option("--features", flags->features, "feature CSV");
    run->add_option("--labels", flags->labels, "label CSV");
    run->add_option("--groups", flags->groups, "group layout JSON");
    run->add_option("--out_dir", flags->out_dir, "output directory");
    run->add_option("--affordances", flags->affordances,
                    "restrict to these affordances");
    run->add_option("--n_splits", flags->n_splits, "train/test splits");
    run->add_option("--split_ratio", flags->split_ratio, "train share");
    run->add_option("--cv_folds", flags->cv_folds, "cross-validation folds");
    run->add_option("--c_grid", flags->c_grid, "push-weight grid");
    run->add_option("--lambda_grid", flags->lambda_grid,
                    "regularization grid");
    run->add_option("--pca_grid", flags->pca_grid,
                    "baseline projection dims (0 = none)");
    run->add_option("--k", flags->k, "neighbor count");
    run->add_option("--d", flags->d, "transform output dimension");
    run->add_option("--max_epochs", flags->max_epochs, "epoch cap");
    run->add_option("--init_step", flags->init_step, "initial step size");
    run->add_option("--tol", flags->tol, "relative loss-change stop");
    run->add_option("--norm_eps", flags->norm_eps, "column-norm smoothing");
    run->add_option("--master_seed", flags->master_seed, "seed of all seeds");
    run->add_option("--threads", flags->threads, "parallel tasks");
    run->add_flag("--global_standardization,!--no-global_standardization",
                  flags->global_standardization,
                  "fit standardization on the full dataset");
    run->add_option("--kept_rel_threshold", flags->kept_rel_threshold,
                    "relative column-norm survival threshold");

    run->callback([run, flags] {
        lmcar::ExperimentConfig cfg;
        if (run->count("--config")) {
            cfg = lmcar::load_experiment_config(flags->config);
        }
        if (run->count("--features")) cfg.features = flags->features;
        if (run->count("--labels")) cfg.labels = flags->labels;
        if (run->count("--groups")) cfg.groups = flags->groups;
        if (run->count("--out_dir")) cfg.out_dir = flags->out_dir;
        if (run->count("--affordances")) cfg.affordances = flags->affordances;
        if (run->count("--n_splits")) cfg.n_splits = flags->n_splits;
        if (run->count("--split_ratio")) cfg.split_ratio = flags->split_ratio;
        if (run->count("--cv_folds")) cfg.cv_folds = flags->cv_folds;
        if (run->count("--c_grid")) cfg.c_grid = flags->c_grid;
        if (run->count("--lambda_grid")) cfg.lambda_grid = flags->lambda_grid;
        if (run->count("--pca_grid")) cfg.pca_grid = flags->pca_grid;
        if (run->count("--k")) cfg.train.k = flags->k;
        if (run->count("--d")) cfg.train.d = flags->d;
        if (run->count("--max_epochs")) cfg.train.max_epochs = flags->max_epochs;
        if (run->count("--init_step")) cfg.train.init_step = flags->init_step;
        if (run->count("--tol")) cfg.train.tol = flags->tol;
        if (run->count("--norm_eps")) cfg.train.norm_eps = flags->norm_eps;
        if (run->count("--master_seed")) cfg.master_seed = flags->master_seed;
        if (run->count("--threads")) cfg.threads = flags->threads;
        if (run->count("--global_standardization") ||
            run->count("--no-global_standardization")) {
            cfg.global_standardization = flags->global_standardization;
        }
        if (run->count("--kept_rel_threshold")) {
            cfg.kept_rel_threshold = flags->kept_rel_threshold;
        }
        const auto result = lmcar::run_experiment(cfg);
        std::cout << result.runs.size() << " runs written to "
                  << cfg.out_dir.string() << "\n";
    });
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Group-sparse metric learning toolkit"};
    app.require_subcommand(1);

    auto* validate =
        app.add_subcommand("validate", "Check dataset files, exit 0 iff clean");
    auto v_features = std::make_shared<std::string>();
    auto v_labels = std::make_shared<std::string>();
    auto v_groups = std::make_shared<std::string>();
    validate->add_option("--features", *v_features, "feature CSV")->required();
    validate->add_option("--labels", *v_labels, "label CSV")->required();
    validate->add_option("--groups", *v_groups, "group layout JSON")
        ->required();
    validate->callback([v_features, v_labels, v_groups] {
        const auto issues =
            lmcar::validate_dataset_files(*v_features, *v_labels, *v_groups);
        if (!issues.empty()) {
            for (const auto& issue : issues) {
                std::cerr << issue << "\n";
            }
            throw lmcar::ValidationError(std::to_string(issues.size()) +
                                         " problem(s) found");
        }
        std::cout << "dataset is valid\n";
    });

    add_run_command(app);

    auto* features = app.add_subcommand(
        "features", "Group masses and averaged profiles from saved models");
    auto f_models = std::make_shared<std::string>();
    auto f_groups = std::make_shared<std::string>();
    auto f_out = std::make_shared<std::string>();
    features->add_option("--models", *f_models, "models directory")
        ->required();
    features->add_option("--groups", *f_groups, "group layout JSON")
        ->required();
    features->add_option("--out", *f_out, "output directory")->required();
    features->callback([f_models, f_groups, f_out] {
        lmcar::write_feature_report(*f_models, *f_groups, *f_out);
        std::cout << "feature report written to " << *f_out << "\n";
    });

    auto* associate = app.add_subcommand(
        "associate", "Pairwise KL table between affordances");
    auto a_models = std::make_shared<std::string>();
    auto a_out = std::make_shared<std::string>();
    associate->add_option("--models", *a_models, "models directory")
        ->required();
    associate->add_option("--out", *a_out, "output directory")->required();
    associate->callback([a_models, a_out] {
        lmcar::write_association_report(*a_models, *a_out);
        std::cout << "association table written to " << *a_out << "\n";
    });

    auto* project = app.add_subcommand(
        "project", "Color point clouds by learned feature importance");
    auto p_model = std::make_shared<std::string>();
    auto p_groups = std::make_shared<std::string>();
    auto p_out = std::make_shared<std::string>();
    auto p_clouds = std::make_shared<std::vector<std::string>>();
    project->add_option("--model", *p_model, "trained model JSON")->required();
    project->add_option("--groups", *p_groups, "group layout JSON")
        ->required();
    project->add_option("--out", *p_out, "output directory")->required();
    project->add_option("clouds", *p_clouds, "point-cloud map JSON files")
        ->required();
    project->callback([p_model, p_groups, p_out, p_clouds] {
        std::vector<std::filesystem::path> paths(p_clouds->begin(),
                                                 p_clouds->end());
        lmcar::project_clouds(*p_model, *p_groups, paths, *p_out);
        std::cout << paths.size() << " cloud(s) written to " << *p_out << "\n";
    });

    auto* synth = app.add_subcommand(
        "synth", "Generate a synthetic dataset with known informative dims");
    auto s_spec = std::make_shared<std::string>();
    auto s_out = std::make_shared<std::string>();
    synth->add_option("--spec", *s_spec, "synthetic spec JSON")->required();
    synth->add_option("--out", *s_out, "output directory")->required();
    synth->callback([s_spec, s_out] {
        lmcar::write_synthetic(*s_spec, *s_out);
        std::cout << "synthetic dataset written to " << *s_out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const lmcar::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const lmcar::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
