#pragma once

#include <string>
#include <utility>
#include <vector>

#include "core/capacity.hpp"
#include "core/verify.hpp"

// Artifact emission. CSV tables always start with a header row; numbers are
// printed with 12 significant digits. JSON emitters embed the caller-supplied
// config object under "config" so every artifact records how it was produced.

namespace qmc {

std::string format_g12(double x);

std::string labeled_matrices_csv(
    const std::vector<std::pair<std::string, ComplexMatrix>>& blocks);
std::string quantities_csv(const std::vector<std::pair<std::string, double>>& rows);
std::string trajectory_csv(const MixingProbeResult& probe);
std::string capacity_csv(const std::vector<CapacityReport>& reports);
std::string verify_csv(const VerifyReport& rep);

std::string artifact_json_simulate(const std::string& config_json, const DensityMatrix& output,
                                   const DensityMatrix& memory);
std::string artifact_json_quantities(const std::string& config_json,
                                     const std::vector<std::pair<std::string, double>>& rows);
std::string artifact_json_mixing(const std::string& config_json, const MixingProbeResult& probe,
                                 const ContractionEstimate& contraction);
std::string artifact_json_capacity(const std::string& config_json,
                                   const ConvergenceExperiment& ex);
std::string artifact_json_verify(const std::string& config_json, const VerifyReport& rep);

}  // namespace qmc
