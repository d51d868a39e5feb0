#include "core/serialize.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qmc {
namespace {

using nlohmann::json;

json matrix_json(const ComplexMatrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c)
            row.push_back({m.at(r, c).real(), m.at(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

json with_config(const std::string& config_json) {
    json doc;
    doc["config"] = json::parse(config_json);
    return doc;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json probe_json(const MixingProbeResult& probe) {
    json p;
    p["epsilon"] = probe.epsilon;
    p["n_epsilon"] = probe.n_epsilon ? json(*probe.n_epsilon) : json(nullptr);
    p["samples"] = probe.samples_used;
    json traj = json::array();
    for (const auto& [step, dist] : probe.trajectory) traj.push_back({step, dist});
    p["trajectory"] = std::move(traj);
    return p;
}

json report_json(const CapacityReport& rep) {
    json r;
    r["n"] = rep.n;
    r["memory_labels"] = rep.memory_labels;
    r["chi_per_use"] = rep.chi_per_use;
    r["lower"] = rep.lower;
    r["upper"] = rep.upper;
    r["gap"] = rep.gap;
    if (rep.gap_bound) r["gap_bound"] = *rep.gap_bound;
    r["converged"] = rep.converged;
    r["restarts"] = rep.restarts;
    r["seed"] = rep.seed;
    return r;
}

}  // namespace

std::string format_g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string labeled_matrices_csv(
    const std::vector<std::pair<std::string, ComplexMatrix>>& blocks) {
    std::ostringstream out;
    out << "matrix,row,col,re,im\n";
    for (const auto& [name, m] : blocks)
        for (int r = 0; r < m.rows(); ++r)
            for (int c = 0; c < m.cols(); ++c)
                out << name << ',' << r << ',' << c << ',' << format_g12(m.at(r, c).real()) << ','
                    << format_g12(m.at(r, c).imag()) << '\n';
    return out.str();
}

std::string quantities_csv(const std::vector<std::pair<std::string, double>>& rows) {
    std::ostringstream out;
    out << "quantity,value\n";
    for (const auto& [name, value] : rows) out << name << ',' << format_g12(value) << '\n';
    return out.str();
}

std::string trajectory_csv(const MixingProbeResult& probe) {
    std::ostringstream out;
    out << "step,max_distance\n";
    for (const auto& [step, dist] : probe.trajectory) out << step << ',' << format_g12(dist) << '\n';
    return out.str();
}

std::string capacity_csv(const std::vector<CapacityReport>& reports) {
    std::ostringstream out;
    out << "n,memory_id,chi_per_use,lower,upper,gap,gap_bound\n";
    for (const CapacityReport& rep : reports)
        for (std::size_t i = 0; i < rep.memory_labels.size(); ++i)
            out << rep.n << ',' << rep.memory_labels[i] << ',' << format_g12(rep.chi_per_use[i])
                << ',' << format_g12(rep.lower) << ',' << format_g12(rep.upper) << ','
                << format_g12(rep.gap) << ','
                << (rep.gap_bound ? format_g12(*rep.gap_bound) : std::string()) << '\n';
    return out.str();
}

std::string verify_csv(const VerifyReport& rep) {
    std::ostringstream out;
    out << "check,applicable,passed,worst,tolerance,samples,detail\n";
    for (const VerifyCheck& c : rep.checks)
        out << c.name << ',' << (c.applicable ? 1 : 0) << ',' << (c.passed ? 1 : 0) << ','
            << format_g12(c.worst) << ',' << format_g12(c.tolerance) << ',' << c.samples << ','
            << c.detail << '\n';
    return out.str();
}

std::string artifact_json_simulate(const std::string& config_json, const DensityMatrix& output,
                                   const DensityMatrix& memory) {
    json doc = with_config(config_json);
    doc["output_state"] = matrix_json(output.matrix());
    doc["memory_state"] = matrix_json(memory.matrix());
    return dump(doc);
}

std::string artifact_json_quantities(const std::string& config_json,
                                     const std::vector<std::pair<std::string, double>>& rows) {
    json doc = with_config(config_json);
    json results;
    for (const auto& [name, value] : rows) results[name] = value;
    doc["results"] = std::move(results);
    return dump(doc);
}

std::string artifact_json_mixing(const std::string& config_json, const MixingProbeResult& probe,
                                 const ContractionEstimate& contraction) {
    json doc = with_config(config_json);
    json p = probe_json(probe);
    p["sup_ratio"] = contraction.sup_ratio;
    p["contraction_samples"] = contraction.samples_used;
    doc["mixing_probe"] = std::move(p);
    return dump(doc);
}

std::string artifact_json_capacity(const std::string& config_json,
                                   const ConvergenceExperiment& ex) {
    json doc = with_config(config_json);
    doc["epsilon"] = ex.epsilon;
    doc["fixed_point"] = {{"verdict", ex.fixed_point.verdict},
                          {"max_deviation", ex.fixed_point.max_deviation},
                          {"samples", ex.fixed_point.samples_used}};
    doc["override_used"] = ex.override_used;
    doc["mixing_probe"] = probe_json(ex.probe);
    json reps = json::array();
    for (const CapacityReport& rep : ex.reports) reps.push_back(report_json(rep));
    doc["reports"] = std::move(reps);
    return dump(doc);
}

std::string artifact_json_verify(const std::string& config_json, const VerifyReport& rep) {
    json doc = with_config(config_json);
    doc["ok"] = rep.ok;
    json checks = json::array();
    for (const VerifyCheck& c : rep.checks)
        checks.push_back({{"name", c.name},
                          {"applicable", c.applicable},
                          {"passed", c.passed},
                          {"worst", c.worst},
                          {"tolerance", c.tolerance},
                          {"samples", c.samples},
                          {"detail", c.detail}});
    doc["checks"] = std::move(checks);
    return dump(doc);
}

}  // namespace qmc
