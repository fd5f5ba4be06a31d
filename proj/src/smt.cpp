#include "duckcheck/smt.hpp"

#include "util.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace duck {

using detail::overloaded;

const char *to_string(Verdict v) {
    switch (v) {
    case Verdict::Valid: return "valid";
    case Verdict::Invalid: return "invalid";
    case Verdict::Unknown: return "unknown";
    }
    return "?";
}

// ---------------------------------------------------------------- process

class SolverProcess {
public:
    explicit SolverProcess(const std::string &cmd) {
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2], from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0) throw SolverError("pipe failed");
        pid_ = fork();
        if (pid_ < 0) throw SolverError("fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], 0);
            dup2(from_child[1], 1);
            int devnull = open("/dev/null", O_WRONLY);
            if (devnull >= 0) dup2(devnull, 2);
            close(to_child[1]);
            close(from_child[0]);
            execl("/bin/sh", "sh", "-c", ("exec " + cmd).c_str(), static_cast<char *>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_ = to_child[1];
        out_ = from_child[0];
    }

    ~SolverProcess() {
        if (in_ >= 0) close(in_);
        if (out_ >= 0) close(out_);
        if (pid_ > 0) {
            kill(pid_, SIGKILL);
            waitpid(pid_, nullptr, 0);
        }
    }

    void write_all(const std::string &s) {
        size_t off = 0;
        while (off < s.size()) {
            ssize_t n = ::write(in_, s.data() + off, s.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw SolverError("solver process closed its input");
            }
            off += static_cast<size_t>(n);
        }
    }

    /// Empty optional on timeout.
    std::optional<std::string> read_line(int timeout_ms) {
        while (true) {
            auto nl = buf_.find('\n');
            if (nl != std::string::npos) {
                auto line = buf_.substr(0, nl);
                buf_.erase(0, nl + 1);
                return line;
            }
            pollfd p{out_, POLLIN, 0};
            int r = poll(&p, 1, timeout_ms);
            if (r == 0) return std::nullopt;
            if (r < 0) {
                if (errno == EINTR) continue;
                throw SolverError("poll failed");
            }
            char tmp[4096];
            ssize_t n = ::read(out_, tmp, sizeof tmp);
            if (n <= 0) throw SolverError("solver process exited unexpectedly");
            buf_.append(tmp, static_cast<size_t>(n));
        }
    }

private:
    pid_t pid_ = -1;
    int in_ = -1, out_ = -1;
    std::string buf_;
};

// ---------------------------------------------------------------- encoder

namespace {

const char *kPrelude = R"((set-option :print-success false)
(set-logic ALL)
(declare-sort Val 0)
(declare-sort Ty 0)
(declare-fun tag (Val) Val)
(declare-fun sel (Val Val) Val)
(declare-fun has (Val Val) Bool)
(declare-fun eqmod (Val Val Val) Bool)
(declare-fun ext (Val Val Val) Val)
(declare-fun toInt (Val) Int)
(declare-fun ofInt (Int) Val)
(declare-fun HasTyp (Val Ty) Bool)
(declare-const vtrue Val)
(declare-const vfalse Val)
(declare-const vnull Val)
(declare-const vempty Val)
)";

std::string quote_sym(const std::string &prefix, const std::string &name) {
    std::string s = "|" + prefix + ":";
    for (char c : name) s += (c == '|' || c == '\\') ? '_' : c;
    return s + "|";
}

std::string int_lit(std::int64_t z) {
    if (z < 0) {
        auto mag = static_cast<std::uint64_t>(0) - static_cast<std::uint64_t>(z);
        return "(- " + std::to_string(mag) + ")";
    }
    return std::to_string(z);
}

}  // namespace

struct SolverSession::Encoder {
    BoxTable &boxes;
    std::set<std::string> declared;
    std::map<std::string, int> strings, opaques;
    std::string decls;
    std::set<std::string> int_facts;

    explicit Encoder(BoxTable &b) : boxes(b) {}

    std::string declare(const std::string &sym, const char *sort) {
        if (declared.insert(sym).second) decls += "(declare-const " + sym + " " + sort + ")\n";
        return sym;
    }

    std::string ofint(const std::string &e) {
        auto t = "(ofInt " + e + ")";
        int_facts.insert("(= (toInt " + t + ") " + e + ")");
        return t;
    }

    std::string value(const Value &w) {
        return std::visit(
            overloaded{
                [&](const Value::Var &x) { return declare(quote_sym("x", x.name), "Val"); },
                [&](const Const &c) {
                    return std::visit(
                        overloaded{
                            [&](const Const::Int &i) { return ofint(int_lit(i.z)); },
                            [&](const Const::Bool &b) { return std::string(b.b ? "vtrue" : "vfalse"); },
                            [&](const Const::Str &s) {
                                auto it = strings.emplace(s.s, static_cast<int>(strings.size())).first;
                                return declare("|s:" + std::to_string(it->second) + "|", "Val");
                            },
                            [&](const Const::Null &) { return std::string("vnull"); },
                            [&](const Const::EmptyDict &) { return std::string("vempty"); },
                            [&](const Const::PrimOp &p) {
                                return declare(quote_sym("p", std::string(prim_name(p.op))), "Val");
                            },
                            [&](const Const::Partial &) { return opaque(w); },
                        },
                        c.v);
                },
                [&](const Value::DictExt &d) {
                    return "(ext " + value(*d.base) + " " + value(*d.key) + " " + value(*d.val) + ")";
                },
                [&](const auto &) { return opaque(w); },
            },
            w.v);
    }

    std::string opaque(const Value &w) {
        auto it = opaques.emplace(canonical_key(w), static_cast<int>(opaques.size())).first;
        return declare("|o:" + std::to_string(it->second) + "|", "Val");
    }

    std::string lval(const LogicalValue &l) {
        if (auto *w = std::get_if<ValuePtr>(&l.v)) return value(**w);
        auto &f = std::get<LogicalValue::FnApp>(l.v);
        std::vector<std::string> as;
        for (auto &a : f.args) as.push_back(lval(*a));
        switch (f.fn) {
        case Fn::Sel: return "(sel " + as[0] + " " + as[1] + ")";
        case Fn::Tag: return "(tag " + as[0] + ")";
        case Fn::Plus: return ofint("(+ (toInt " + as[0] + ") (toInt " + as[1] + "))");
        case Fn::Minus: return ofint("(- (toInt " + as[0] + ") (toInt " + as[1] + "))");
        case Fn::Ext: return "(ext " + as[0] + " " + as[1] + " " + as[2] + ")";
        }
        return "";
    }

    std::string nary(const char *op, const std::vector<FormulaPtr> &ps, const char *unit) {
        if (ps.empty()) return unit;
        if (ps.size() == 1) return formula(*ps[0]);
        std::string s = std::string("(") + op;
        for (auto &p : ps) s += " " + formula(*p);
        return s + ")";
    }

    std::string formula(const Formula &p) {
        return std::visit(
            overloaded{
                [&](const Formula::Atom &a) {
                    std::vector<std::string> as;
                    for (auto &x : a.args) as.push_back(lval(*x));
                    switch (a.pred) {
                    case Pred::Eq: return "(= " + as[0] + " " + as[1] + ")";
                    case Pred::Lt: return "(< (toInt " + as[0] + ") (toInt " + as[1] + "))";
                    case Pred::Le: return "(<= (toInt " + as[0] + ") (toInt " + as[1] + "))";
                    case Pred::Has: return "(has " + as[0] + " " + as[1] + ")";
                    case Pred::EqMod: return "(eqmod " + as[0] + " " + as[1] + " " + as[2] + ")";
                    }
                    return std::string("true");
                },
                [&](const Formula::HasType &h) {
                    auto b = declare("|b:" + std::to_string(boxes.box(h.term)) + "|", "Ty");
                    return "(HasTyp " + lval(*h.lw) + " " + b + ")";
                },
                [&](const Formula::And &a) { return nary("and", a.ps, "true"); },
                [&](const Formula::Or &o) { return nary("or", o.ps, "false"); },
                [&](const Formula::Not &n) { return "(not " + formula(*n.p) + ")"; },
                [&](const Formula::Implies &i) { return "(=> " + formula(*i.p) + " " + formula(*i.q) + ")"; },
                [&](const Formula::Iff &i) { return "(= " + formula(*i.p) + " " + formula(*i.q) + ")"; },
                [&](const Formula::True &) { return std::string("true"); },
                [&](const Formula::False &) { return std::string("false"); },
            },
            p.v);
    }
};

// ---------------------------------------------------------------- session

SolverSession::SolverSession(SolverConfig cfg, BoxTable &boxes)
    : cfg_(std::move(cfg)), boxes_(boxes), enc_(std::make_unique<Encoder>(boxes)) {
    if (cfg_.log_dir) {
        std::error_code ec;
        std::filesystem::create_directories(*cfg_.log_dir, ec);
        static int session_seq = 0;
        log_path_ = *cfg_.log_dir + "/session-" + std::to_string(getpid()) + "-" +
                    std::to_string(session_seq++) + ".smt2";
    }
}

SolverSession::~SolverSession() = default;

void SolverSession::ensure_started() {
    if (proc_) return;
    proc_ = std::make_unique<SolverProcess>(cfg_.cmd);
    // Redeclare everything the encoder knows about on a fresh process.
    std::string decls;
    for (auto &s : enc_->declared) {
        bool ty = s.rfind("|b:", 0) == 0;
        decls += "(declare-const " + s + (ty ? " Ty" : " Val") + ")\n";
    }
    enc_->decls.clear();
    std::string init = kPrelude;
    if (cfg_.timeout_ms > 0) init += "(set-option :timeout " + std::to_string(cfg_.timeout_ms) + ")\n";
    send(init + decls);
}

void SolverSession::send(const std::string &s) {
    if (!log_path_.empty()) {
        std::ofstream out(log_path_, std::ios::app);
        out << s;
    }
    proc_->write_all(s);
}

void SolverSession::restart() {
    proc_.reset();
    ++stats_.restarts;
}

std::string SolverSession::read_line() {
    int wait = cfg_.timeout_ms > 0 ? cfg_.timeout_ms + 2000 : -1;
    auto line = proc_->read_line(wait);
    if (!line) {
        restart();
        return "unknown";
    }
    return *line;
}

std::string SolverSession::translate(const FormulaPtr &p) { return enc_->formula(*p); }

std::vector<Verdict> SolverSession::run(const std::vector<FormulaPtr> &hyps0,
                                        const std::vector<FormulaPtr> &goals) {
    std::vector<FormulaPtr> hyps;
    for (auto &fr : frames_) hyps.insert(hyps.end(), fr.begin(), fr.end());
    hyps.insert(hyps.end(), hyps0.begin(), hyps0.end());

    std::vector<FormulaPtr> all = hyps;
    all.insert(all.end(), goals.begin(), goals.end());
    auto axioms = axioms_for(all);

    enc_->int_facts.clear();
    std::string body;
    for (auto &h : hyps) body += "(assert " + enc_->formula(*h) + ")\n";
    for (auto &a : axioms) body += "(assert " + enc_->formula(*a) + ")\n";
    std::vector<std::string> gtext;
    for (auto &g : goals) gtext.push_back(enc_->formula(*g));
    for (auto &f : enc_->int_facts) body += "(assert " + f + ")\n";

    std::vector<Verdict> out(goals.size(), Verdict::Unknown);
    std::vector<size_t> todo;
    for (size_t i = 0; i < goals.size(); ++i) {
        auto it = cache_.find(body + "|" + gtext[i]);
        if (it != cache_.end()) {
            out[i] = it->second;
            ++stats_.cache_hits;
        } else {
            todo.push_back(i);
        }
    }
    if (todo.empty()) return out;

    ensure_started();
    std::string q = enc_->decls;
    enc_->decls.clear();
    q += "(push 1)\n" + body;
    for (auto i : todo) q += "(push 1)\n(assert (not " + gtext[i] + "))\n(check-sat)\n(pop 1)\n";
    q += "(pop 1)\n";
    send(q);
    bool dead = false;
    for (auto i : todo) {
        ++stats_.queries;
        if (dead) continue;
        auto line = read_line();
        if (!proc_) dead = true;
        if (line.rfind("(error", 0) == 0) {
            restart();
            throw SolverError("solver rejected query: " + line);
        }
        Verdict v = line == "unsat" ? Verdict::Valid : line == "sat" ? Verdict::Invalid : Verdict::Unknown;
        out[i] = v;
        if (v != Verdict::Unknown) cache_.emplace(body + "|" + gtext[i], v);
    }
    return out;
}

Verdict SolverSession::check_valid(const std::vector<FormulaPtr> &hyps, const FormulaPtr &goal) {
    return run(hyps, {goal})[0];
}

std::vector<Verdict> SolverSession::check_valid_many(const std::vector<FormulaPtr> &hyps,
                                                     const std::vector<FormulaPtr> &goals) {
    if (goals.empty()) return {};
    return run(hyps, goals);
}

}  // namespace duck
