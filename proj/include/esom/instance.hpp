#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "esom/errors.hpp"

namespace esom {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { LessEqual, Equal, GreaterEqual };

struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = kInf;
    bool is_integer = false;
    double cost = 0.0;  // objective coefficient (minimization)
};

struct LinTerm {
    int var = -1;
    double coef = 0.0;
};

struct Constraint {
    std::string name;
    std::vector<LinTerm> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

enum class InstanceScope { Full, Slice, Reduced, Generic };

// Solver-independent optimization problem. Constraints reference variables
// by index; `index` maps semantic names (y_IRE[wind], x_THE[gas,17]) back
// to variable ids for extraction and LP export.
struct LinearProgram {
    std::string name = "lp";
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;
    std::unordered_map<std::string, int> index;

    InstanceScope scope = InstanceScope::Generic;
    std::size_t scope_slice_index = 0;            // Slice scope
    std::vector<std::size_t> scope_weights;       // Reduced scope: weight per representative
    std::vector<std::size_t> scope_segment_hours; // hours per representative segment
    double scope_fix_scale = 1.0;                 // fixed-cost scaling applied at build time
    double objective_offset = 0.0;                // constant term (from fixed-variable folding)

    int add_variable(const std::string& name, double lower, double upper, double cost,
                     bool is_integer = false) {
        if (index.count(name))
            throw InternalConsistencyError("duplicate variable name '" + name + "'");
        variables.push_back(Variable{name, lower, upper, is_integer, cost});
        int id = static_cast<int>(variables.size()) - 1;
        index.emplace(name, id);
        return id;
    }

    void add_constraint(const std::string& name, std::vector<LinTerm> terms, Sense sense, double rhs) {
        for (const auto& t : terms)
            if (t.var < 0 || t.var >= static_cast<int>(variables.size()))
                throw InternalConsistencyError("constraint '" + name + "' references undeclared variable");
        constraints.push_back(Constraint{name, std::move(terms), sense, rhs});
    }

    int var(const std::string& name) const {
        auto it = index.find(name);
        if (it == index.end()) throw InternalConsistencyError("unknown variable '" + name + "'");
        return it->second;
    }

    std::size_t num_integer() const {
        std::size_t n = 0;
        for (const auto& v : variables) n += v.is_integer;
        return n;
    }

    double objective_value(const std::vector<double>& x) const {
        double obj = objective_offset;
        for (std::size_t j = 0; j < variables.size(); ++j) obj += variables[j].cost * x[j];
        return obj;
    }
};

using EsomInstance = LinearProgram;

}  // namespace esom
