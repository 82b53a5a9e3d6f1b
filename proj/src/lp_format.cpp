#include "esom/lp_format.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace esom {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_terms(std::string& out, const std::vector<LinTerm>& terms,
                  const std::vector<Variable>& vars) {
    bool first = true;
    for (const auto& t : terms) {
        if (t.coef == 0.0) continue;
        double c = t.coef;
        if (first) {
            if (c < 0.0) {
                out += "- ";
                c = -c;
            }
            first = false;
        } else {
            out += c < 0.0 ? " - " : " + ";
            if (c < 0.0) c = -c;
        }
        out += fmt(c);
        out += ' ';
        out += vars[static_cast<std::size_t>(t.var)].name;
    }
    if (first) out += "0 dummy_zero";  // empty expression placeholder, never emitted by builders
}

}  // namespace

std::string lp_to_string(const LinearProgram& lp) {
    std::string out;
    if (lp.objective_offset != 0.0)
        out += "\\ objective_offset " + fmt(lp.objective_offset) + "\n";
    out += "Minimize\n obj: ";
    std::vector<LinTerm> obj;
    for (std::size_t j = 0; j < lp.variables.size(); ++j)
        if (lp.variables[j].cost != 0.0) obj.push_back({static_cast<int>(j), lp.variables[j].cost});
    if (obj.empty() && !lp.variables.empty()) obj.push_back({0, 0.0});
    bool wrote = false;
    {
        std::string expr;
        bool first = true;
        for (const auto& t : obj) {
            double c = t.coef;
            if (first) {
                if (c < 0.0) {
                    expr += "- ";
                    c = -c;
                }
                first = false;
            } else {
                expr += c < 0.0 ? " - " : " + ";
                if (c < 0.0) c = -c;
            }
            expr += fmt(c);
            expr += ' ';
            expr += lp.variables[static_cast<std::size_t>(t.var)].name;
            wrote = true;
        }
        out += expr;
    }
    if (!wrote) out += "0";
    out += "\nSubject To\n";
    for (const auto& c : lp.constraints) {
        out += ' ';
        out += c.name.empty() ? "c" : c.name;
        out += ": ";
        append_terms(out, c.terms, lp.variables);
        out += c.sense == Sense::LessEqual ? " <= " : (c.sense == Sense::Equal ? " = " : " >= ");
        out += fmt(c.rhs);
        out += '\n';
    }

    std::string bounds;
    for (const auto& v : lp.variables) {
        bool def_lower = v.lower == 0.0;
        bool def_upper = !std::isfinite(v.upper);
        if (def_lower && def_upper) continue;
        bounds += ' ';
        if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
            bounds += v.name + " free";
        } else if (!std::isfinite(v.lower)) {
            bounds += v.name + " >= -inf\n " + v.name + " <= " + fmt(v.upper);
        } else if (v.lower == v.upper) {
            bounds += v.name + " = " + fmt(v.lower);
        } else if (def_upper) {
            bounds += v.name + " >= " + fmt(v.lower);
        } else {
            bounds += fmt(v.lower) + " <= " + v.name + " <= " + fmt(v.upper);
        }
        bounds += '\n';
    }
    if (!bounds.empty()) {
        out += "Bounds\n";
        out += bounds;
    }

    std::string generals;
    for (const auto& v : lp.variables)
        if (v.is_integer) generals += ' ' + v.name + '\n';
    if (!generals.empty()) {
        out += "Generals\n";
        out += generals;
    }
    out += "End\n";
    return out;
}

void write_lp_file(const LinearProgram& lp, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << lp_to_string(lp);
    if (!f) throw IoError("write to '" + path + "' failed");
}

namespace {

struct Tokenizer {
    std::vector<std::string> tokens;
    std::size_t pos = 0;
    double offset = 0.0;

    explicit Tokenizer(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (auto c = line.find('\\'); c != std::string::npos) {
                std::istringstream cs(line.substr(c + 1));
                std::string key;
                double v;
                if (cs >> key >> v && key == "objective_offset") offset = v;
                line = line.substr(0, c);
            }
            std::string tok;
            for (char ch : line) {
                if (std::isspace(static_cast<unsigned char>(ch)) || ch == ':' || ch == '<' ||
                    ch == '>' || ch == '=' || ch == '+' || ch == '-') {
                    if (!tok.empty()) {
                        tokens.push_back(tok);
                        tok.clear();
                    }
                    if (ch == ':' || ch == '<' || ch == '>' || ch == '=' || ch == '+' || ch == '-')
                        tokens.emplace_back(1, ch);
                } else {
                    tok += ch;
                }
            }
            if (!tok.empty()) tokens.push_back(tok);
        }
        // Merge <=, >= pairs.
        std::vector<std::string> merged;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if ((tokens[i] == "<" || tokens[i] == ">") && i + 1 < tokens.size() && tokens[i + 1] == "=") {
                merged.push_back(tokens[i] + "=");
                ++i;
            } else {
                merged.push_back(tokens[i]);
            }
        }
        tokens = std::move(merged);
    }

    bool done() const { return pos >= tokens.size(); }
    const std::string& peek() const { return tokens[pos]; }
    std::string next() { return tokens[pos++]; }
};

bool is_number(const std::string& s, double& v) {
    if (s.empty()) return false;
    char c = s[0];
    if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.') return false;
    try {
        std::size_t used = 0;
        v = std::stod(s, &used);
        return used == s.size();
    } catch (const std::exception&) {
        return false;
    }
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

bool is_section(const std::string& tok, Tokenizer& tz, std::string& section) {
    std::string l = lower(tok);
    if (l == "minimize" || l == "maximize" || l == "end" || l == "bounds" || l == "generals" ||
        l == "general" || l == "integers" || l == "binaries" || l == "binary") {
        section = l;
        return true;
    }
    if (l == "subject" && !tz.done() && lower(tz.peek()) == "to") {
        tz.next();
        section = "subject to";
        return true;
    }
    if (l == "st" || l == "s.t.") {
        section = "subject to";
        return true;
    }
    return false;
}

}  // namespace

LinearProgram lp_from_string(const std::string& text) {
    Tokenizer tz(text);
    LinearProgram lp;
    lp.objective_offset = tz.offset;

    auto var_id = [&lp](const std::string& name) {
        auto it = lp.index.find(name);
        if (it != lp.index.end()) return it->second;
        return lp.add_variable(name, 0.0, kInf, 0.0);
    };

    std::string section;
    bool maximize = false;
    if (tz.done() || !is_section(tz.next(), tz, section) || (section != "minimize" && section != "maximize"))
        throw ValidationError("LP file must start with Minimize or Maximize");
    maximize = section == "maximize";

    // Objective: optional "name:" then a linear expression until a section keyword.
    struct PendingTerm {
        double coef;
        std::string var;
    };
    std::vector<PendingTerm> obj_terms;
    {
        double sign = 1.0;
        bool have_coef = false;
        double coef = 1.0;
        while (!tz.done()) {
            std::string tok = tz.next();
            std::string sec;
            if (is_section(tok, tz, sec)) {
                section = sec;
                break;
            }
            if (tok == ":") {
                obj_terms.clear();  // previous token was the objective label
                sign = 1.0;
                have_coef = false;
                coef = 1.0;
                continue;
            }
            if (tok == "+") continue;
            if (tok == "-") {
                sign = -sign;
                continue;
            }
            double v;
            if (is_number(tok, v)) {
                coef = v;
                have_coef = true;
            } else {
                obj_terms.push_back({sign * (have_coef ? coef : 1.0), tok});
                sign = 1.0;
                coef = 1.0;
                have_coef = false;
            }
        }
    }

    // Constraints.
    while (section == "subject to" && !tz.done()) {
        std::string tok = tz.next();
        std::string sec;
        if (is_section(tok, tz, sec)) {
            section = sec;
            break;
        }
        // Row label?
        std::string name;
        if (!tz.done() && tz.peek() == ":") {
            name = tok;
            tz.next();
            tok.clear();
        }
        std::vector<LinTerm> terms;
        double sign = 1.0, coef = 1.0;
        bool have_coef = false;
        Sense sense = Sense::LessEqual;
        // Re-inject first expression token when there was no label.
        std::size_t replay = tok.empty() ? 0 : 1;
        std::string replay_tok = tok;
        for (;;) {
            std::string t;
            if (replay) {
                t = replay_tok;
                replay = 0;
            } else {
                if (tz.done()) throw ValidationError("constraint '" + name + "' has no comparison");
                t = tz.next();
            }
            if (t == "<=" || t == "<") {
                sense = Sense::LessEqual;
                break;
            }
            if (t == ">=" || t == ">") {
                sense = Sense::GreaterEqual;
                break;
            }
            if (t == "=") {
                sense = Sense::Equal;
                break;
            }
            if (t == "+") continue;
            if (t == "-") {
                sign = -sign;
                continue;
            }
            double v;
            if (is_number(t, v)) {
                coef = v;
                have_coef = true;
            } else {
                terms.push_back({var_id(t), sign * (have_coef ? coef : 1.0)});
                sign = 1.0;
                coef = 1.0;
                have_coef = false;
            }
        }
        if (tz.done()) throw ValidationError("constraint '" + name + "' missing rhs");
        double rsign = 1.0;
        std::string rt = tz.next();
        while (rt == "+" || rt == "-") {
            if (rt == "-") rsign = -rsign;
            if (tz.done()) throw ValidationError("constraint '" + name + "' missing rhs");
            rt = tz.next();
        }
        double rhs;
        if (!is_number(rt, rhs)) throw ValidationError("constraint '" + name + "': bad rhs '" + rt + "'");
        lp.constraints.push_back(Constraint{name, std::move(terms), sense, rsign * rhs});
    }

    // Bounds.
    while (section == "bounds" && !tz.done()) {
        std::string tok = tz.next();
        std::string sec;
        if (is_section(tok, tz, sec)) {
            section = sec;
            break;
        }
        double sign = 1.0;
        while (tok == "+" || tok == "-") {
            if (tok == "-") sign = -sign;
            tok = tz.next();
        }
        double v;
        if (is_number(tok, v) || lower(tok) == "inf" || lower(tok) == "infinity") {
            // "num <= x [<= num]" form
            double lo = lower(tok).front() == 'i' ? sign * kInf : sign * v;
            std::string op = tz.next();
            if (op != "<=" && op != "<") throw ValidationError("bad bound line near '" + tok + "'");
            std::string name = tz.next();
            int id = var_id(name);
            lp.variables[static_cast<std::size_t>(id)].lower = lo;
            if (!tz.done() && (tz.peek() == "<=" || tz.peek() == "<")) {
                tz.next();
                double usign = 1.0;
                std::string ut = tz.next();
                while (ut == "+" || ut == "-") {
                    if (ut == "-") usign = -usign;
                    ut = tz.next();
                }
                double uv;
                if (is_number(ut, uv))
                    lp.variables[static_cast<std::size_t>(id)].upper = usign * uv;
                else if (lower(ut) == "inf" || lower(ut) == "infinity")
                    lp.variables[static_cast<std::size_t>(id)].upper = usign * kInf;
                else
                    throw ValidationError("bad upper bound '" + ut + "'");
            }
        } else {
            // "x free" | "x = v" | "x >= v" | "x <= v"
            int id = var_id(tok);
            auto& var = lp.variables[static_cast<std::size_t>(id)];
            if (tz.done()) throw ValidationError("dangling bound for '" + tok + "'");
            std::string op = tz.next();
            if (lower(op) == "free") {
                var.lower = -kInf;
                var.upper = kInf;
                continue;
            }
            double bsign = 1.0;
            std::string bt = tz.next();
            while (bt == "+" || bt == "-") {
                if (bt == "-") bsign = -bsign;
                bt = tz.next();
            }
            double bv;
            bool numeric = is_number(bt, bv);
            bool infinite = lower(bt) == "inf" || lower(bt) == "infinity";
            if (!numeric && !infinite) throw ValidationError("bad bound value '" + bt + "'");
            double val = infinite ? bsign * kInf : bsign * bv;
            if (op == "=") {
                var.lower = var.upper = val;
            } else if (op == ">=" || op == ">") {
                var.lower = val;
            } else if (op == "<=" || op == "<") {
                var.upper = val;
            } else {
                throw ValidationError("bad bound operator '" + op + "'");
            }
        }
    }

    // Integer sections.
    while ((section == "generals" || section == "general" || section == "integers" ||
            section == "binaries" || section == "binary") &&
           !tz.done()) {
        bool binary = section == "binaries" || section == "binary";
        std::string tok = tz.next();
        std::string sec;
        if (is_section(tok, tz, sec)) {
            section = sec;
            continue;
        }
        int id = var_id(tok);
        auto& var = lp.variables[static_cast<std::size_t>(id)];
        var.is_integer = true;
        if (binary) {
            var.lower = std::max(var.lower, 0.0);
            var.upper = std::min(var.upper, 1.0);
        }
    }

    for (const auto& t : obj_terms)
        lp.variables[static_cast<std::size_t>(var_id(t.var))].cost += maximize ? -t.coef : t.coef;
    if (maximize) lp.objective_offset = -lp.objective_offset;
    return lp;
}

LinearProgram parse_lp_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return lp_from_string(ss.str());
}

}  // namespace esom
