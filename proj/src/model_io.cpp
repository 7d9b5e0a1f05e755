#include "lmcar/model_io.hpp"

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lmcar/errors.hpp"
#include "lmcar/numio.hpp"

namespace lmcar {

namespace {

using nlohmann::json;

json encode_matrix(const Eigen::MatrixXd& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            data.push_back(format_double_hex(m(r, c)));
        }
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Eigen::MatrixXd decode_matrix(const json& j) {
    const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
    const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 ||
        static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw ValidationError("matrix entry count does not match its shape");
    }
    Eigen::MatrixXd m(rows, cols);
    Eigen::Index idx = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = parse_double(data[idx++].get<std::string>());
        }
    }
    return m;
}

json encode_vector(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(format_double_hex(v[i]));
    }
    return out;
}

Eigen::VectorXd decode_vector(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = parse_double(j[i].get<std::string>());
    }
    return v;
}

} // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    json j;
    j["matrix"] = encode_matrix(model.transform.matrix);
    j["train_features"] = encode_matrix(model.train_features);
    json labels = json::array();
    for (Eigen::Index i = 0; i < model.train_labels.size(); ++i) {
        labels.push_back(model.train_labels[i]);
    }
    j["train_labels"] = labels;
    j["config"] = json{{"k", model.config.k},
                       {"c", format_double_hex(model.config.c)},
                       {"lambda", format_double_hex(model.config.lambda)},
                       {"d", model.config.d},
                       {"max_epochs", model.config.max_epochs},
                       {"init_step", format_double_hex(model.config.init_step)},
                       {"tol", format_double_hex(model.config.tol)},
                       {"norm_eps", format_double_hex(model.config.norm_eps)},
                       {"seed", model.config.seed}};
    json trace = json::array();
    for (double v : model.loss_trace) {
        trace.push_back(format_double_hex(v));
    }
    j["loss_trace"] = trace;
    j["standardization"] = json{{"mean", encode_vector(model.standardization.mean)},
                                {"std", encode_vector(model.standardization.std)}};
    j["step_underflow"] = model.step_underflow;

    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot open '" + path.string() +
                              "' for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw ValidationError("write to '" + path.string() + "' failed");
    }
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open model file '" + path.string() + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("model file '" + path.string() +
                              "': " + e.what());
    }
    try {
        TrainedModel model;
        model.transform.matrix = decode_matrix(j.at("matrix"));
        model.train_features = decode_matrix(j.at("train_features"));
        const auto& labels = j.at("train_labels");
        model.train_labels.resize(static_cast<Eigen::Index>(labels.size()));
        for (std::size_t i = 0; i < labels.size(); ++i) {
            model.train_labels[static_cast<Eigen::Index>(i)] =
                labels[i].get<int>();
        }
        const auto& cfg = j.at("config");
        model.config.k = cfg.at("k").get<int>();
        model.config.c = parse_double(cfg.at("c").get<std::string>());
        model.config.lambda = parse_double(cfg.at("lambda").get<std::string>());
        model.config.d = cfg.at("d").get<int>();
        model.config.max_epochs = cfg.at("max_epochs").get<int>();
        model.config.init_step =
            parse_double(cfg.at("init_step").get<std::string>());
        model.config.tol = parse_double(cfg.at("tol").get<std::string>());
        model.config.norm_eps =
            parse_double(cfg.at("norm_eps").get<std::string>());
        model.config.seed = cfg.at("seed").get<std::uint64_t>();
        for (const auto& v : j.at("loss_trace")) {
            model.loss_trace.push_back(parse_double(v.get<std::string>()));
        }
        model.standardization.mean =
            decode_vector(j.at("standardization").at("mean"));
        model.standardization.std =
            decode_vector(j.at("standardization").at("std"));
        model.step_underflow = j.at("step_underflow").get<bool>();
        return model;
    } catch (const json::exception& e) {
        throw ValidationError("model file '" + path.string() +
                              "': " + e.what());
    }
}

} // namespace lmcar
