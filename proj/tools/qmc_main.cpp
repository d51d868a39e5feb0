#include <qmc/qmc.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

namespace fs = std::filesystem;

namespace {

struct ChannelHandle {
    qmc_channel* p = nullptr;
    ~ChannelHandle() { qmc_channel_free(p); }
};

struct OwnedString {
    char* p = nullptr;
    ~OwnedString() { qmc_string_free(p); }
};

bool read_file(const std::string& path, std::string& out) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot open '" << path << "'\n";
        return false;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    out = buf.str();
    return true;
}

bool load_channel(const std::string& path, ChannelHandle& ch) {
    std::string text;
    if (!read_file(path, text)) return false;
    if (qmc_channel_parse(text.c_str(), &ch.p) != QMC_OK) {
        std::cerr << "error: " << qmc_last_error() << "\n";
        return false;
    }
    return true;
}

// Artifacts are buffered and written together so a failed run leaves nothing
// behind; a failed write rolls back the files already flushed.
bool write_artifacts(const std::string& dir,
                     const std::vector<std::pair<std::string, const char*>>& files) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    std::vector<fs::path> written;
    for (const auto& [name, content] : files) {
        if (!content) continue;
        const fs::path path = fs::path(dir) / name;
        std::ofstream f(path, std::ios::binary);
        f << content;
        f.close();
        if (!f) {
            std::cerr << "error: cannot write '" << path.string() << "'\n";
            for (const fs::path& w : written) fs::remove(w, ec);
            return false;
        }
        written.push_back(path);
    }
    for (const fs::path& w : written) std::cout << "wrote " << w.string() << "\n";
    return true;
}

int status_exit(qmc_status st) {
    if (st == QMC_OK) return 0;
    std::cerr << "error: " << qmc_last_error() << "\n";
    return st == QMC_ERR_VERIFY ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memory-channel simulation, mixing probes, and capacity bounds"};
    app.require_subcommand(1);
    app.footer("The QMC_MAX_DIM environment variable overrides the working-dimension cap "
               "(default 1024).");

    std::string channel_path, state_path, output_dir = ".", format = "both";
    std::uint64_t seed = 1;
    int n = 1, n_max = 1, step_budget = 200, restarts = 0, ensemble_size = 0, threads = 1;
    double epsilon = 0.1;
    bool product_only = false, override_fixed_point = false;

    const auto add_common = [&](CLI::App* sub, bool with_channel) {
        if (with_channel)
            sub->add_option("--channel", channel_path, "channel document (JSON)")->required();
        sub->add_option("--output", output_dir, "artifact directory (default '.')");
        sub->add_option("--format", format, "artifact selection: json, csv, or both")
            ->check(CLI::IsMember({"json", "csv", "both"}));
    };

    CLI::App* simulate = app.add_subcommand("simulate", "apply the channel and dump the output");
    add_common(simulate, true);
    simulate->add_option("--n", n, "number of channel uses")->check(CLI::PositiveNumber);
    simulate->add_option("--state", state_path,
                         "input state document (default: maximally mixed)");

    CLI::App* entropy = app.add_subcommand("entropy", "entropic quantities of a state/ensemble");
    add_common(entropy, false);
    entropy->add_option("--state", state_path, "state or ensemble document (JSON)")->required();

    CLI::App* probe = app.add_subcommand("probe-mixing", "memory trajectory distance probe");
    add_common(probe, true);
    probe->add_option("--epsilon", epsilon, "closeness threshold in (0, 1]")->required();
    probe->add_option("--step-budget", step_budget, "maximum probed block length")
        ->check(CLI::PositiveNumber);
    probe->add_option("--seed", seed, "sampling seed");

    CLI::App* capacity = app.add_subcommand("capacity", "rate optimization for n = 1..n_max");
    add_common(capacity, true);
    capacity->add_option("--n-max", n_max, "largest block length")->required()
        ->check(CLI::PositiveNumber);
    capacity->add_option("--epsilon", epsilon, "mixing threshold for the gap bound")->required();
    capacity->add_option("--seed", seed, "optimizer seed");
    capacity->add_option("--restarts", restarts, "optimizer restarts (0 = default)");
    capacity->add_option("--ensemble-size", ensemble_size, "signal states per ensemble (0 = auto)");
    capacity->add_flag("--product-only", product_only, "restrict signals to per-use products");
    capacity->add_option("--threads", threads, "worker threads (never changes results)")
        ->check(CLI::PositiveNumber);
    capacity->add_flag("--override-fixed-point", override_fixed_point,
                       "proceed when the fixed-point check fails");

    CLI::App* verify = app.add_subcommand("verify", "run the property suite on a channel");
    add_common(verify, true);
    verify->add_option("--seed", seed, "sampling seed");
    verify->add_option("--threads", threads, "accepted for symmetry; the suite is sequential")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const bool want_json = format != "csv";
    const bool want_csv = format != "json";

    if (app.got_subcommand(simulate)) {
        ChannelHandle ch;
        if (!load_channel(channel_path, ch)) return 1;
        std::string input_text;
        if (!state_path.empty() && !read_file(state_path, input_text)) return 1;
        OwnedString j, c;
        const qmc_status st =
            qmc_simulate(ch.p, state_path.empty() ? nullptr : input_text.c_str(), n,
                         want_json ? &j.p : nullptr, want_csv ? &c.p : nullptr);
        if (st != QMC_OK) return status_exit(st);
        return write_artifacts(output_dir, {{"simulate.json", j.p}, {"simulate.csv", c.p}}) ? 0 : 1;
    }

    if (app.got_subcommand(entropy)) {
        std::string doc;
        if (!read_file(state_path, doc)) return 1;
        OwnedString j, c;
        const qmc_status st = qmc_entropy_report(doc.c_str(), want_json ? &j.p : nullptr,
                                                 want_csv ? &c.p : nullptr);
        if (st != QMC_OK) return status_exit(st);
        return write_artifacts(output_dir, {{"entropy.json", j.p}, {"entropy.csv", c.p}}) ? 0 : 1;
    }

    if (app.got_subcommand(probe)) {
        ChannelHandle ch;
        if (!load_channel(channel_path, ch)) return 1;
        OwnedString j, c;
        const qmc_status st = qmc_probe_mixing(ch.p, epsilon, step_budget, seed,
                                               want_json ? &j.p : nullptr,
                                               want_csv ? &c.p : nullptr);
        if (st != QMC_OK) return status_exit(st);
        return write_artifacts(output_dir, {{"mixing_summary.json", j.p},
                                            {"mixing_trajectory.csv", c.p}})
                   ? 0
                   : 1;
    }

    if (app.got_subcommand(capacity)) {
        ChannelHandle ch;
        if (!load_channel(channel_path, ch)) return 1;
        OwnedString j, c;
        const qmc_status st = qmc_capacity_experiment(
            ch.p, n_max, epsilon, seed, restarts, ensemble_size, product_only ? 1 : 0, threads,
            override_fixed_point ? 1 : 0, want_json ? &j.p : nullptr, want_csv ? &c.p : nullptr);
        if (st != QMC_OK) return status_exit(st);
        return write_artifacts(output_dir, {{"capacity_report.json", j.p},
                                            {"capacity_report.csv", c.p}})
                   ? 0
                   : 1;
    }

    // verify: artifacts are written even when checks fail; the exit code tells.
    ChannelHandle ch;
    if (!load_channel(channel_path, ch)) return 1;
    OwnedString j, c;
    const qmc_status st =
        qmc_verify(ch.p, seed, want_json ? &j.p : nullptr, want_csv ? &c.p : nullptr);
    if (st != QMC_OK && st != QMC_ERR_VERIFY) return status_exit(st);
    if (!write_artifacts(output_dir, {{"verify_report.json", j.p}, {"verify_report.csv", c.p}}))
        return 1;
    return st == QMC_OK ? 0 : status_exit(st);
}
