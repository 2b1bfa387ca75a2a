#include "rpslab/system_spec.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "rpslab/kernels/kernels.hpp"

namespace rpslab {

std::vector<double> SystemSpec::sigma_flat() const {
    std::vector<double> flat(static_cast<std::size_t>(d) * d, 0.0);
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i) flat[static_cast<std::size_t>(k) * d + i] = sigma[k][i];
    return flat;
}

void SystemSpec::validate() const {
    if (d < 1 || d > kernels::kMaxDim)
        throw Error("system dimension must be in [1, " +
                    std::to_string(kernels::kMaxDim) + "]");
    if (A.dim() != d) throw Error("drift matrix dimension mismatch");
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j && A(i, j) < 0.0)
                throw Error("non-cooperative A: a_" + std::to_string(i + 1) +
                            std::to_string(j + 1) + " = " + format_double(A(i, j)) +
                            " < 0");
    if (static_cast<int>(sigma.size()) != d) throw Error("need exactly d noise matrices");
    for (const Vec& s : sigma)
        if (static_cast<int>(s.size()) != d) throw Error("noise diagonal length mismatch");
    if (!(T > 0.0)) throw Error("nonpositive period T");
    if (feedback.dim() != d) throw Error("feedback dimension mismatch");
    if (feedback.kind() != FeedbackKind::Custom) {
        if (std::fabs(T - feedback.period()) > 1e-12 * feedback.period())
            throw Error("builtin feedback of kind " + to_string(feedback.kind()) +
                        " requires T = " + format_double(feedback.period()));
    }
    if (lambda_override && !(*lambda_override > 0.0))
        throw Error("lambda override must be positive");
    if (sup_er_override && !(*sup_er_override > 0.0))
        throw Error("sup_er override must be positive");
}

bool SystemSpec::is_single_loop() const {
    for (int i = 0; i < d; ++i) {
        if (!(A(i, i) < 0.0)) return false;
        for (int j = 0; j < d; ++j) {
            if (j == i) continue;
            if (i >= 1 && j == i - 1) {
                if (A(i, j) != 1.0) return false;
            } else if (A(i, j) != 0.0) {
                return false;
            }
        }
    }
    // one diagonal noise matrix per component
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            if (i != k && sigma[k][i] != 0.0) return false;
    return true;
}

bool SystemSpec::is_diagonal_drift() const {
    for (int i = 0; i < d; ++i) {
        if (!(A(i, i) < 0.0)) return false;
        for (int j = 0; j < d; ++j)
            if (i != j && A(i, j) != 0.0) return false;
    }
    for (int k = 0; k < d; ++k)
        for (int i = 0; i < d; ++i)
            if (i != k && sigma[k][i] != 0.0) return false;
    return true;
}

Vec SystemSpec::alphas() const {
    Vec a(d);
    for (int i = 0; i < d; ++i) a[i] = -A(i, i);
    return a;
}

Vec SystemSpec::own_sigmas() const {
    Vec s(d);
    for (int k = 0; k < d; ++k) s[k] = sigma[k][k];
    return s;
}

namespace {

struct Line {
    int number;
    std::string section;
    std::vector<std::pair<std::string, std::string>> kv;
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_real(const std::string& v, int line) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ParseError("bad numeric value '" + v + "'", line, 0);
    return x;
}

double parse_period(const std::string& v, int line) {
    if (v == "2pi") return 2.0 * std::numbers::pi;
    if (v == "pi") return std::numbers::pi;
    return parse_real(v, line);
}

Vec parse_real_list(const std::string& v, int line) {
    Vec out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_real(trim(item), line));
    if (out.empty()) throw ParseError("empty list", line, 0);
    return out;
}

long parse_int(const std::string& v, int line) {
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ParseError("bad integer value '" + v + "'", line, 0);
    return x;
}

// Splits "key=value key=value ..." where an expr<N>= key consumes the rest
// of the line (expressions may contain spaces).
void parse_kv(const std::string& body, Line& out) {
    std::size_t pos = 0;
    while (pos < body.size()) {
        while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
        if (pos >= body.size()) break;
        std::size_t eq = body.find('=', pos);
        if (eq == std::string::npos)
            throw ParseError("expected key=value, got '" + body.substr(pos) + "'",
                             out.number, static_cast<int>(pos) + 1);
        std::string key = trim(body.substr(pos, eq - pos));
        if (key.empty() || key.find(' ') != std::string::npos)
            throw ParseError("bad key near '" + body.substr(pos, eq - pos) + "'",
                             out.number, static_cast<int>(pos) + 1);
        if (key.rfind("expr", 0) == 0) {
            out.kv.emplace_back(key, trim(body.substr(eq + 1)));
            return;
        }
        std::size_t end = eq + 1;
        while (end < body.size() && !std::isspace(static_cast<unsigned char>(body[end]))) ++end;
        out.kv.emplace_back(key, body.substr(eq + 1, end - eq - 1));
        pos = end;
    }
}

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> lines;
    std::stringstream ss(text);
    std::string raw;
    int number = 0;
    while (std::getline(ss, raw)) {
        ++number;
        std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw = raw.substr(0, hash);
        raw = trim(raw);
        if (raw.empty()) continue;
        if (raw[0] != '[')
            throw ParseError("expected '[section]' to start the line", number, 1);
        std::size_t close = raw.find(']');
        if (close == std::string::npos) throw ParseError("missing ']'", number, 1);
        Line line;
        line.number = number;
        std::string header = trim(raw.substr(1, close - 1));
        std::size_t sp = header.find_first_of(" \t");
        line.section = sp == std::string::npos ? header : header.substr(0, sp);
        if (line.section.empty()) throw ParseError("empty section name", number, 1);
        Line attrs;
        attrs.number = number;
        if (sp != std::string::npos) parse_kv(header.substr(sp + 1), attrs);
        line.kv = std::move(attrs.kv);
        Line rest;
        rest.number = number;
        parse_kv(raw.substr(close + 1), rest);
        for (auto& p : rest.kv) line.kv.push_back(std::move(p));
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace

SystemSpec parse_system(const std::string& text) {
    const std::vector<Line> lines = tokenize(text);
    if (lines.empty()) throw ParseError("empty spec", 1, 0);
    if (lines[0].section != "system")
        throw ParseError("[system] must be the first section", lines[0].number, 0);

    SystemSpec spec;
    bool have_T = false;
    for (const auto& [key, value] : lines[0].kv) {
        if (key == "d") {
            long d = parse_int(value, lines[0].number);
            if (d < 1 || d > kernels::kMaxDim)
                throw ParseError("dimension out of range", lines[0].number, 0);
            spec.d = static_cast<int>(d);
        } else if (key == "T") {
            spec.T = parse_period(value, lines[0].number);
            have_T = true;
        } else {
            throw ParseError("unknown key '" + key + "' in [system]", lines[0].number, 0);
        }
    }
    if (spec.d == 0) throw ParseError("[system] is missing d=", lines[0].number, 0);
    if (!have_T) throw ParseError("[system] is missing T=", lines[0].number, 0);
    if (!(spec.T > 0.0)) throw ParseError("nonpositive T", lines[0].number, 0);

    std::vector<Vec> drift_rows;
    spec.sigma.assign(spec.d, Vec(spec.d, 0.0));
    std::vector<bool> sigma_seen(spec.d, false);

    struct FeedbackKeys {
        std::map<std::string, std::string> plain;
        std::map<int, std::pair<std::string, int>> exprs;  // index -> (text, line)
        int line = 0;
    } fb;
    bool have_feedback = false;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const Line& line = lines[li];
        if (line.section == "system") {
            throw ParseError("duplicate [system] section", line.number, 0);
        } else if (line.section == "drift") {
            for (const auto& [key, value] : line.kv) {
                if (key != "row")
                    throw ParseError("unknown key '" + key + "' in [drift]", line.number, 0);
                Vec row = parse_real_list(value, line.number);
                if (static_cast<int>(row.size()) != spec.d)
                    throw ParseError("dimension mismatch: drift row has " +
                                         std::to_string(row.size()) + " entries, d = " +
                                         std::to_string(spec.d),
                                     line.number, 0);
                drift_rows.push_back(std::move(row));
            }
        } else if (line.section == "noise") {
            long k = -1;
            Vec diag;
            for (const auto& [key, value] : line.kv) {
                if (key == "k") {
                    k = parse_int(value, line.number);
                } else if (key == "diag") {
                    diag = parse_real_list(value, line.number);
                } else {
                    throw ParseError("unknown key '" + key + "' in [noise]", line.number, 0);
                }
            }
            if (k < 1 || k > spec.d)
                throw ParseError("noise index k out of range", line.number, 0);
            if (static_cast<int>(diag.size()) != spec.d)
                throw ParseError("dimension mismatch in noise diagonal", line.number, 0);
            if (sigma_seen[k - 1])
                throw ParseError("duplicate [noise k=" + std::to_string(k) + "]",
                                 line.number, 0);
            sigma_seen[k - 1] = true;
            spec.sigma[k - 1] = std::move(diag);
        } else if (line.section == "feedback") {
            have_feedback = true;
            fb.line = line.number;
            for (const auto& [key, value] : line.kv) {
                if (key.rfind("expr", 0) == 0) {
                    long idx = parse_int(key.substr(4), line.number);
                    if (idx < 1 || idx > spec.d)
                        throw ParseError("expression index out of range in '" + key + "'",
                                         line.number, 0);
                    fb.exprs[static_cast<int>(idx)] = {value, line.number};
                } else {
                    if (fb.plain.count(key))
                        throw ParseError("duplicate feedback key '" + key + "'",
                                         line.number, 0);
                    fb.plain[key] = value;
                }
            }
        } else if (line.section == "envelope") {
            for (const auto& [key, value] : line.kv) {
                if (key == "lambda")
                    spec.lambda_override = parse_real(value, line.number);
                else if (key == "sup_er")
                    spec.sup_er_override = parse_real(value, line.number);
                else
                    throw ParseError("unknown key '" + key + "' in [envelope]", line.number, 0);
            }
        } else {
            throw ParseError("unknown section [" + line.section + "]", line.number, 0);
        }
    }

    if (static_cast<int>(drift_rows.size()) != spec.d)
        throw ParseError("dimension mismatch: " + std::to_string(drift_rows.size()) +
                             " drift rows for d = " + std::to_string(spec.d),
                         1, 0);
    spec.A = Mat(spec.d);
    for (int i = 0; i < spec.d; ++i)
        for (int j = 0; j < spec.d; ++j) spec.A(i, j) = drift_rows[i][j];

    if (!have_feedback) throw ParseError("missing [feedback] section", 1, 0);
    auto need = [&](const char* key) -> std::string {
        auto it = fb.plain.find(key);
        if (it == fb.plain.end())
            throw ParseError(std::string("feedback is missing ") + key + "=", fb.line, 0);
        return it->second;
    };
    auto known_keys = [&](std::initializer_list<const char*> keys, bool allow_indexed_K) {
        for (const auto& [key, value] : fb.plain) {
            (void)value;
            bool ok = false;
            for (const char* k : keys)
                if (key == k) ok = true;
            if (!ok && allow_indexed_K && key.size() > 1 && key[0] == 'K' &&
                key.find_first_not_of("0123456789", 1) == std::string::npos)
                ok = true;
            if (!ok)
                throw ParseError("unknown feedback key '" + key + "'", fb.line, 0);
        }
    };

    const std::string kind = need("kind");
    bool exact_lip = false;
    if (auto it = fb.plain.find("lipschitz"); it != fb.plain.end()) {
        if (it->second == "exact")
            exact_lip = true;
        else if (it->second != "bound")
            throw ParseError("lipschitz= must be 'exact' or 'bound'", fb.line, 0);
    }

    try {
        if (kind == "goodwin") {
            known_keys({"kind", "V", "K", "m", "lipschitz"}, false);
            if (exact_lip)
                throw Error("lipschitz=exact is only available for othmer_tyson");
            spec.feedback = FeedbackSpec::goodwin(spec.d, parse_real(need("V"), fb.line),
                                                  parse_real(need("K"), fb.line),
                                                  parse_real(need("m"), fb.line));
        } else if (kind == "othmer_tyson") {
            known_keys({"kind", "k0", "K", "m", "lipschitz"}, false);
            spec.feedback = FeedbackSpec::othmer_tyson(
                spec.d, parse_real(need("k0"), fb.line), parse_real(need("K"), fb.line),
                parse_real(need("m"), fb.line), exact_lip);
        } else if (kind == "competitive") {
            known_keys({"kind", "m", "lipschitz"}, true);
            if (exact_lip)
                throw Error("lipschitz=exact is only available for othmer_tyson");
            std::vector<double> Ks(spec.d);
            for (int i = 0; i < spec.d; ++i)
                Ks[i] = parse_real(need(("K" + std::to_string(i + 1)).c_str()), fb.line);
            spec.feedback =
                FeedbackSpec::competitive(spec.d, std::move(Ks), parse_real(need("m"), fb.line));
        } else if (kind == "custom") {
            known_keys({"kind", "lipschitz"}, false);
            if (exact_lip)
                throw Error("lipschitz=exact is only available for othmer_tyson");
            std::vector<FeedbackExpr> exprs;
            for (int i = 1; i <= spec.d; ++i) {
                auto it = fb.exprs.find(i);
                if (it == fb.exprs.end())
                    throw ParseError("custom feedback is missing expr" + std::to_string(i) + "=",
                                     fb.line, 0);
                try {
                    exprs.push_back(FeedbackExpr::parse(it->second.first, spec.d));
                } catch (const ParseError& e) {
                    throw ParseError(std::string("in expr") + std::to_string(i) + ": " + e.what(),
                                     it->second.second, e.column());
                }
            }
            spec.feedback = FeedbackSpec::custom(spec.d, std::move(exprs), spec.T);
        } else {
            throw ParseError("unknown feedback kind '" + kind + "'", fb.line, 0);
        }
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what(), fb.line, 0);
    }

    // Builtins carry an exactly representable natural period; snap T to it
    // so phase arithmetic is exact.
    if (spec.feedback.kind() != FeedbackKind::Custom) {
        if (std::fabs(spec.T - spec.feedback.period()) > 1e-12 * spec.feedback.period())
            throw ParseError("builtin feedback of kind " + kind + " requires T = " +
                                 (spec.feedback.period() == std::numbers::pi ? "pi" : "2pi"),
                             lines[0].number, 0);
        spec.T = spec.feedback.period();
    }

    spec.validate();
    return spec;
}

SystemSpec load_system_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open spec file: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_system(ss.str());
}

}  // namespace rpslab
