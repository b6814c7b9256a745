#pragma once

// Scenario runner behind the qbm executable.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace qbm::cli {

inline constexpr const char* version = "0.1.0";

// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;
inline constexpr int exit_io = 4;

struct CsvTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;

    void add(std::string name, std::vector<double> column);
    std::size_t rows() const;
};

// 17 significant digits, '.' decimal separator, LF line endings.
void emit_csv(const CsvTable& table, const std::string& path);
CsvTable read_csv(const std::string& path);

const std::vector<std::string>& commands();

// Runs one command. `config_dir` resolves relative paths inside the config
// (tabulated force files). Diagnostics go to `err`.
int run(const std::string& command, const std::string& config_text, const std::string& config_dir,
        const std::string& out_dir, std::ostream& err);

// Worker count: QBM_THREADS if set (must be a positive integer), otherwise the
// hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n) on up to thread_count() workers. The exception
// from the lowest failing index is rethrown, so failures are deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qbm::cli
