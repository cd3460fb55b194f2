#pragma once

#include <stdexcept>
#include <string>

namespace polydarcy {

// Error categories map 1:1 onto CLI exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_mesh = 3,
    exit_solver = 4,
    exit_analysis = 5,
};

} // namespace polydarcy
