// Command-line front end. Talks to the library exclusively through the C API.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "qhm/qhm.h"

namespace {

std::mutex g_io;

struct ScenarioHandle {
    qhm_scenario* ptr = nullptr;
    ~ScenarioHandle() { qhm_scenario_free(ptr); }
};

struct TableHandle {
    qhm_table* ptr = nullptr;
    ~TableHandle() { qhm_table_free(ptr); }
};

struct CString {
    char* ptr = nullptr;
    ~CString() { qhm_string_free(ptr); }
};

int report(const std::string& file, qhm_status status) {
    const std::string stage = qhm_last_error_stage();
    std::lock_guard lock(g_io);
    std::cerr << file;
    if (qhm_last_error_line() > 0) {
        std::cerr << ':' << qhm_last_error_line();
        if (qhm_last_error_column() > 0) std::cerr << ':' << qhm_last_error_column();
    }
    std::cerr << ": error [" << qhm_status_name(status) << (stage.empty() ? "" : ", stage " + stage) << "]: "
              << qhm_last_error() << '\n';
    return qhm_exit_code_for_stage(stage.c_str());
}

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Parses a scenario file; returns an exit code (0 on success).
int load(const std::string& path, ScenarioHandle& sc) {
    const auto text = read_file(path);
    if (!text) {
        std::lock_guard lock(g_io);
        std::cerr << path << ": error: cannot read file\n";
        return 1;
    }
    const qhm_status st = qhm_scenario_parse(text->data(), text->size(), &sc.ptr);
    return st == QHM_OK ? 0 : report(path, st);
}

std::string default_output(const std::string& input, const std::string& format) {
    std::filesystem::path p(input);
    p.replace_extension(format);
    return p.string();
}

int run_one(const std::string& path, const std::string& out_override, const std::string& format_override,
            bool batch) {
    ScenarioHandle sc;
    if (int rc = load(path, sc)) return rc;

    TableHandle table;
    if (qhm_status st = qhm_scenario_run(sc.ptr, &table.ptr); st != QHM_OK) return report(path, st);

    const std::string format = format_override.empty() ? qhm_scenario_output_format(sc.ptr) : format_override;
    CString bytes;
    size_t length = 0;
    if (qhm_status st = qhm_table_emit(table.ptr, format.c_str(), &bytes.ptr, &length); st != QHM_OK) {
        return report(path, st);
    }

    std::string target = out_override;
    if (target.empty()) target = qhm_scenario_output_path(sc.ptr);
    if (target.empty() && batch) target = default_output(path, format);
    if (target.empty() || target == "-") {
        std::lock_guard lock(g_io);
        std::cout.write(bytes.ptr, static_cast<std::streamsize>(length));
        return 0;
    }
    std::ofstream out(target, std::ios::binary);
    out.write(bytes.ptr, static_cast<std::streamsize>(length));
    if (!out) {
        std::lock_guard lock(g_io);
        std::cerr << target << ": error: cannot write output\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasi-Hermitian metrics, Dyson maps and time evolution with time-dependent metrics"};
    app.require_subcommand(1);

    std::vector<std::string> run_files;
    std::string out_path;
    std::string format;
    int jobs = 1;
    auto* run = app.add_subcommand("run", "Integrate a scenario and write the result table");
    run->add_option("files", run_files, "Scenario files")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_path, "Output path ('-' for stdout); single scenario only");
    run->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    run->add_option("--jobs", jobs, "Scenarios integrated concurrently")->check(CLI::PositiveNumber);

    std::string check_file;
    auto* check = app.add_subcommand("check", "Parse and validate a scenario without integrating");
    check->add_option("file", check_file, "Scenario file")->required()->check(CLI::ExistingFile);

    std::string metric_file;
    auto* solve = app.add_subcommand("solve-metric", "Print the metric family of H(t0)");
    solve->add_option("file", metric_file, "Scenario file")->required()->check(CLI::ExistingFile);

    std::string spectrum_file;
    auto* spectrum = app.add_subcommand("spectrum", "Print the energies and biorthogonality residual of H(t0)");
    spectrum->add_option("file", spectrum_file, "Scenario file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    if (*run) {
        if (run_files.size() > 1 && !out_path.empty()) {
            std::cerr << "error: --out applies to a single scenario\n";
            return 1;
        }
        if (run_files.size() == 1) return run_one(run_files.front(), out_path, format, false);

        std::atomic<std::size_t> next{0};
        std::vector<int> codes(run_files.size(), 0);
        auto worker = [&] {
            for (std::size_t k = next++; k < run_files.size(); k = next++) {
                codes[k] = run_one(run_files[k], "", format, true);
            }
        };
        std::vector<std::thread> pool;
        const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), run_files.size());
        for (std::size_t k = 0; k < count; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        return *std::max_element(codes.begin(), codes.end());
    }

    if (*check) {
        ScenarioHandle sc;
        if (int rc = load(check_file, sc)) return rc;
        if (qhm_status st = qhm_scenario_validate(sc.ptr); st != QHM_OK) return report(check_file, st);
        std::cout << check_file << ": ok\n";
        return 0;
    }

    const bool metric = static_cast<bool>(*solve);
    const std::string& file = metric ? metric_file : spectrum_file;
    ScenarioHandle sc;
    if (int rc = load(file, sc)) return rc;
    CString text;
    const qhm_status st = metric ? qhm_scenario_describe_metric(sc.ptr, &text.ptr)
                                 : qhm_scenario_describe_spectrum(sc.ptr, &text.ptr);
    if (st != QHM_OK) return report(file, st);
    std::cout << text.ptr;
    return 0;
}
