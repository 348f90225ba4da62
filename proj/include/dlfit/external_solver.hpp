#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "cnf.hpp"
#include "solver.hpp"

namespace dlfit {

// Bridge failures are reported distinctly: a missing or crashing solver is a
// configuration problem, bad output is a protocol problem, and a model that
// fails verification is a correctness problem. None of them is UNSAT.
struct ExternalSolverError : std::runtime_error {
    enum class Kind { Spawn, Protocol, ModelVerification };
    ExternalSolverError(Kind kind, const std::string& msg)
        : std::runtime_error(msg), kind(kind) {}
    Kind kind;
};

namespace detail {

class TempFile {
public:
    explicit TempFile(const std::string& contents) {
        char buf[] = "/tmp/dlfit_cnf_XXXXXX";
        int fd = ::mkstemp(buf);
        if (fd < 0)
            throw ExternalSolverError(ExternalSolverError::Kind::Spawn,
                                      "cannot create temporary DIMACS file");
        path_ = buf;
        std::size_t off = 0;
        while (off < contents.size()) {
            ssize_t n = ::write(fd, contents.data() + off, contents.size() - off);
            if (n < 0) {
                ::close(fd);
                throw ExternalSolverError(ExternalSolverError::Kind::Spawn,
                                          "cannot write temporary DIMACS file");
            }
            off += (std::size_t)n;
        }
        ::close(fd);
    }
    ~TempFile() { ::unlink(path_.c_str()); }
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace detail

// Runs `solver_command <dimacs-file>` and parses SAT-competition output:
// an `s SATISFIABLE` / `s UNSATISFIABLE` status line and, for SAT, `v` lines
// carrying the model as literals terminated by 0. The model is verified
// before the result is returned.
inline SolveResult solve_external(const Cnf& cnf, const std::string& solver_command,
                                  const SolveBudget& budget = {}) {
    auto start = std::chrono::steady_clock::now();
    detail::TempFile dimacs(to_dimacs(cnf));

    std::string command;
    if (budget.timeout_seconds > 0.0)
        command = "timeout " + std::to_string(budget.timeout_seconds) + " ";
    command += solver_command + " " + dimacs.path() + " 2>/dev/null";

    FILE* pipe = ::popen(command.c_str(), "r");
    if (!pipe)
        throw ExternalSolverError(ExternalSolverError::Kind::Spawn,
                                  "cannot launch external solver: " + solver_command);
    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = ::fread(buf, 1, sizeof buf, pipe)) > 0)
        output.append(buf, n);
    int rc = ::pclose(pipe);

    SolveResult result;
    result.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    // GNU timeout exits 124 when the command was killed.
    if (WIFEXITED(rc) && WEXITSTATUS(rc) == 124) {
        result.status = SolveStatus::Timeout;
        return result;
    }
    if (WIFEXITED(rc) && WEXITSTATUS(rc) == 127)
        throw ExternalSolverError(ExternalSolverError::Kind::Spawn,
                                  "external solver not found: " + solver_command);

    bool have_status = false, sat = false;
    std::vector<int> lits;
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("s ", 0) == 0) {
            if (line.find("UNSATISFIABLE") != std::string::npos) {
                have_status = true;
                sat = false;
            } else if (line.find("SATISFIABLE") != std::string::npos) {
                have_status = true;
                sat = true;
            }
        } else if (line.rfind("v", 0) == 0 && (line.size() == 1 || line[1] == ' ')) {
            std::istringstream vl(line.substr(1));
            int lit;
            while (vl >> lit)
                if (lit != 0)
                    lits.push_back(lit);
        }
    }
    if (!have_status)
        throw ExternalSolverError(ExternalSolverError::Kind::Protocol,
                                  "external solver produced no status line: " + solver_command);
    if (!sat) {
        result.status = SolveStatus::Unsat;
        return result;
    }
    result.model.assign((std::size_t)cnf.num_vars, false);
    for (int lit : lits) {
        int v = std::abs(lit);
        if (v < 1 || v > cnf.num_vars)
            throw ExternalSolverError(ExternalSolverError::Kind::Protocol,
                                      "external solver model references unknown variable");
        result.model[v - 1] = lit > 0;
    }
    if (!verify_model(cnf, result.model))
        throw ExternalSolverError(ExternalSolverError::Kind::ModelVerification,
                                  "external solver model does not satisfy the formula");
    result.status = SolveStatus::Sat;
    return result;
}

}  // namespace dlfit
