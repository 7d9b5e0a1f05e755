#pragma once

#include <filesystem>

#include "lmcar/optimizer.hpp"

namespace lmcar {

/// JSON serialization of a trained model. Every real number is written
/// as a hex-float string, so load(save(m)) reproduces m bit for bit.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace lmcar
