#pragma once

// Validity queries against an external SMT-LIB2 solver process.

#include "duckcheck/logic.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace duck {

struct SolverConfig {
    std::string cmd = "z3 -in";
    int timeout_ms = 10000;
    std::optional<std::string> log_dir;
};

enum class Verdict { Valid, Invalid, Unknown };

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverStats {
    long queries = 0;     // check-sat calls actually sent
    long cache_hits = 0;
    long restarts = 0;
};

class SolverProcess;

/// One solver process plus the symbol tables of the encoding. Each query is
/// sent in its own push/pop frame; declarations are global.
class SolverSession {
public:
    SolverSession(SolverConfig cfg, BoxTable &boxes);
    ~SolverSession();
    SolverSession(const SolverSession &) = delete;
    SolverSession &operator=(const SolverSession &) = delete;

    /// Is (/\ hyps) => goal valid?
    Verdict check_valid(const std::vector<FormulaPtr> &hyps, const FormulaPtr &goal);
    /// One shared frame for the hypotheses, one check per goal.
    std::vector<Verdict> check_valid_many(const std::vector<FormulaPtr> &hyps,
                                          const std::vector<FormulaPtr> &goals);

    /// Runs `body` with extra hypotheses in scope of every query it issues.
    template <class F>
    auto with_assumptions(const std::vector<FormulaPtr> &fs, F &&body) {
        frames_.push_back(fs);
        struct Pop {
            SolverSession *s;
            ~Pop() { s->frames_.pop_back(); }
        } pop{this};
        return body();
    }
    std::size_t depth() const { return frames_.size(); }

    const SolverStats &stats() const { return stats_; }
    const SolverConfig &config() const { return cfg_; }

    /// SMT-LIB text of a single formula (declarations registered as a side
    /// effect). Exposed for tests.
    std::string translate(const FormulaPtr &p);

private:
    struct Encoder;
    void ensure_started();
    void send(const std::string &s);
    std::string read_line();
    void restart();
    std::vector<Verdict> run(const std::vector<FormulaPtr> &hyps, const std::vector<FormulaPtr> &goals);

    SolverConfig cfg_;
    BoxTable &boxes_;
    std::unique_ptr<SolverProcess> proc_;
    std::unique_ptr<Encoder> enc_;
    std::vector<std::vector<FormulaPtr>> frames_;
    std::map<std::string, Verdict> cache_;
    SolverStats stats_;
    std::string pending_decls_;
    int log_seq_ = 0;
    std::string log_path_;
};

const char *to_string(Verdict v);

}  // namespace duck
