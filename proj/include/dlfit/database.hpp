#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "decimal.hpp"

namespace dlfit {

inline constexpr const char* kInverseRolePrefix = "__inv_";
inline constexpr const char* kFeatureNamePrefix = "__fge_";

inline bool is_valid_name(const std::string& s) {
    if (s.empty())
        return false;
    if (!(std::isalpha((unsigned char)s[0]) || s[0] == '_'))
        return false;
    for (char c : s)
        if (!(std::isalnum((unsigned char)c) || c == '_'))
            return false;
    return true;
}

inline bool has_reserved_prefix(const std::string& s) {
    return s.rfind(kInverseRolePrefix, 0) == 0 || s.rfind(kFeatureNamePrefix, 0) == 0;
}

struct ConceptFact {
    std::string name;
    std::string individual;
};

struct RoleFact {
    std::string name;
    std::string source;
    std::string target;
};

struct FeatureFact {
    std::string name;
    std::string individual;
    Decimal value;
};

// A role name or its inverse.
struct RoleRef {
    std::string name;
    bool inverse = false;

    friend bool operator==(const RoleRef&, const RoleRef&) = default;
    friend auto operator<=>(const RoleRef&, const RoleRef&) = default;
};

// Immutable fact set with adjacency indexes. Individuals are interned to
// dense ids in first-mention order, which makes every derived structure
// deterministic for a given fact order.
class Database {
public:
    Database() = default;

    Database(std::vector<ConceptFact> concept_facts, std::vector<RoleFact> role_facts,
             std::vector<FeatureFact> feature_facts,
             const std::vector<std::string>& extra_individuals = {}) {
        // extra_individuals pins adom members that carry no facts; reductions
        // use this so that dropping facts never shrinks the domain.
        for (const auto& name : extra_individuals)
            intern(name);
        for (const auto& f : concept_facts) {
            check_name(f.name);
            int a = intern(f.individual);
            concept_members_[f.name];  // ensure name exists even pre-sizing
            pending_concepts_.push_back({f.name, a});
        }
        for (const auto& f : role_facts) {
            check_name(f.name);
            int a = intern(f.source);
            int b = intern(f.target);
            pending_roles_.push_back({f.name, a, b});
        }
        for (const auto& f : feature_facts) {
            check_name(f.name);
            int a = intern(f.individual);
            auto& vals = feature_values_[f.name];
            auto it = vals.find(a);
            if (it != vals.end()) {
                if (!(it->second == f.value))
                    throw std::invalid_argument("conflicting feature facts for " + f.name + "(" +
                                                f.individual + ", ...)");
            } else {
                vals.emplace(a, f.value);
            }
        }
        const int n = (int)individual_names_.size();
        for (auto& [name, members] : concept_members_)
            members.assign(n, false);
        for (const auto& [name, a] : pending_concepts_)
            concept_members_[name][a] = true;
        for (const auto& [name, a, b] : pending_roles_) {
            auto& adj = roles_[name];
            if (adj.forward.empty()) {
                adj.forward.resize(n);
                adj.backward.resize(n);
            }
            adj.forward[a].push_back(b);
            adj.backward[b].push_back(a);
        }
        for (auto& [name, adj] : roles_) {
            for (auto& v : adj.forward)
                dedupe(v);
            for (auto& v : adj.backward)
                dedupe(v);
        }
        pending_concepts_.clear();
        pending_roles_.clear();
        check_disjoint_names();
    }

    int num_individuals() const { return (int)individual_names_.size(); }

    const std::string& individual_name(int id) const { return individual_names_[id]; }

    // Returns -1 when the name does not occur in the database.
    int individual_id(const std::string& name) const {
        auto it = individual_ids_.find(name);
        return it == individual_ids_.end() ? -1 : it->second;
    }

    bool has_concept_fact(const std::string& name, int individual) const {
        auto it = concept_members_.find(name);
        return it != concept_members_.end() && it->second[individual];
    }

    const std::vector<bool>* concept_extension(const std::string& name) const {
        auto it = concept_members_.find(name);
        return it == concept_members_.end() ? nullptr : &it->second;
    }

    static const std::vector<int>& empty_successors() {
        static const std::vector<int> none;
        return none;
    }

    const std::vector<int>& successors(int individual, const RoleRef& role) const {
        auto it = roles_.find(role.name);
        if (it == roles_.end())
            return empty_successors();
        const auto& side = role.inverse ? it->second.backward : it->second.forward;
        return side[individual];
    }

    const Decimal* feature_value(const std::string& feature, int individual) const {
        auto it = feature_values_.find(feature);
        if (it == feature_values_.end())
            return nullptr;
        auto jt = it->second.find(individual);
        return jt == it->second.end() ? nullptr : &jt->second;
    }

    std::vector<std::string> concept_names() const {
        std::vector<std::string> out;
        for (const auto& [name, _] : concept_members_)
            out.push_back(name);
        return out;
    }

    std::vector<std::string> role_names() const {
        std::vector<std::string> out;
        for (const auto& [name, _] : roles_)
            out.push_back(name);
        return out;
    }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> out;
        for (const auto& [name, _] : feature_values_)
            out.push_back(name);
        return out;
    }

    bool has_feature_facts() const { return !feature_values_.empty(); }

    // Sorted distinct observed values of a feature; empty if unknown.
    std::vector<Decimal> observed_values(const std::string& feature) const {
        std::vector<Decimal> out;
        auto it = feature_values_.find(feature);
        if (it == feature_values_.end())
            return out;
        for (const auto& [_, v] : it->second)
            out.push_back(v);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    const std::map<std::string, std::unordered_map<int, Decimal>>& feature_facts() const {
        return feature_values_;
    }

    // Concept name labels of an individual, in sorted name order.
    std::vector<std::string> labels(int individual) const {
        std::vector<std::string> out;
        for (const auto& [name, members] : concept_members_)
            if (members[individual])
                out.push_back(name);
        return out;
    }

    // Re-serializes the database as concrete fact lists (deterministic order).
    std::vector<ConceptFact> all_concept_facts() const {
        std::vector<ConceptFact> out;
        for (const auto& [name, members] : concept_members_)
            for (int a = 0; a < (int)members.size(); ++a)
                if (members[a])
                    out.push_back({name, individual_names_[a]});
        return out;
    }

    std::vector<RoleFact> all_role_facts() const {
        std::vector<RoleFact> out;
        for (const auto& [name, adj] : roles_)
            for (int a = 0; a < (int)adj.forward.size(); ++a)
                for (int b : adj.forward[a])
                    out.push_back({name, individual_names_[a], individual_names_[b]});
        return out;
    }

    std::vector<FeatureFact> all_feature_facts() const {
        std::vector<FeatureFact> out;
        for (const auto& [name, vals] : feature_values_) {
            std::vector<std::pair<int, Decimal>> sorted(vals.begin(), vals.end());
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            for (const auto& [a, v] : sorted)
                out.push_back({name, individual_names_[a], v});
        }
        return out;
    }

    std::size_t fact_count() const {
        std::size_t n = 0;
        for (const auto& [_, members] : concept_members_)
            n += (std::size_t)std::count(members.begin(), members.end(), true);
        for (const auto& [_, adj] : roles_)
            for (const auto& v : adj.forward)
                n += v.size();
        for (const auto& [_, vals] : feature_values_)
            n += vals.size();
        return n;
    }

private:
    struct Adjacency {
        std::vector<std::vector<int>> forward;
        std::vector<std::vector<int>> backward;
    };

    static void check_name(const std::string& name) {
        if (!is_valid_name(name))
            throw std::invalid_argument("invalid name: '" + name + "'");
    }

    void check_disjoint_names() const {
        for (const auto& [name, _] : concept_members_) {
            if (roles_.count(name) || feature_values_.count(name))
                throw std::invalid_argument("name used in multiple categories: " + name);
        }
        for (const auto& [name, _] : roles_)
            if (feature_values_.count(name))
                throw std::invalid_argument("name used in multiple categories: " + name);
    }

    static void dedupe(std::vector<int>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }

    int intern(const std::string& name) {
        if (!is_valid_name(name))
            throw std::invalid_argument("invalid individual name: '" + name + "'");
        auto [it, inserted] = individual_ids_.emplace(name, (int)individual_names_.size());
        if (inserted)
            individual_names_.push_back(name);
        return it->second;
    }

    std::vector<std::string> individual_names_;
    std::unordered_map<std::string, int> individual_ids_;
    std::map<std::string, std::vector<bool>> concept_members_;
    std::map<std::string, Adjacency> roles_;
    std::map<std::string, std::unordered_map<int, Decimal>> feature_values_;
    std::vector<std::pair<std::string, int>> pending_concepts_;
    std::vector<std::tuple<std::string, int, int>> pending_roles_;
};

using DatabasePtr = std::shared_ptr<const Database>;

// Collects facts before constructing an immutable Database.
struct FactSet {
    std::vector<ConceptFact> concepts;
    std::vector<RoleFact> roles;
    std::vector<FeatureFact> features;
    std::vector<std::string> extra_individuals;

    DatabasePtr build() const {
        return std::make_shared<Database>(concepts, roles, features, extra_individuals);
    }
};

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                             std::to_string(column)),
          line(line),
          column(column) {}
    int line;
    int column;
};

// Fact file: one fact per line, `Name(ind)`, `role(a,b)`, `feature(a, 1.5)`,
// `#` comments. Two-argument facts are role facts when the second argument is
// an identifier and feature facts when it is a decimal literal.
inline FactSet parse_fact_text(const std::string& text) {
    FactSet facts;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::size_t i = 0;
        auto skip_ws = [&] { while (i < line.size() && std::isspace((unsigned char)line[i])) ++i; };
        skip_ws();
        if (i == line.size())
            continue;
        auto read_token = [&]() -> std::string {
            std::size_t start = i;
            while (i < line.size() && (std::isalnum((unsigned char)line[i]) || line[i] == '_' ||
                                       line[i] == '.' || line[i] == '-' || line[i] == '+'))
                ++i;
            if (i == start)
                throw ParseError("expected a name or value", lineno, (int)i + 1);
            return line.substr(start, i - start);
        };
        auto expect = [&](char c) {
            skip_ws();
            if (i >= line.size() || line[i] != c)
                throw ParseError(std::string("expected '") + c + "'", lineno, (int)i + 1);
            ++i;
        };
        std::string name = read_token();
        // Fresh names produced by the reductions are reserved; user input
        // must not collide with them.
        if (has_reserved_prefix(name))
            throw ParseError("name uses reserved prefix: '" + name + "'", lineno, 1);
        expect('(');
        skip_ws();
        std::string arg1 = read_token();
        skip_ws();
        if (i < line.size() && line[i] == ',') {
            ++i;
            skip_ws();
            std::string arg2 = read_token();
            expect(')');
            if (!arg2.empty() && (std::isdigit((unsigned char)arg2[0]) || arg2[0] == '-' ||
                                  arg2[0] == '+' || arg2[0] == '.')) {
                facts.features.push_back({name, arg1, Decimal::parse(arg2)});
            } else {
                facts.roles.push_back({name, arg1, arg2});
            }
        } else {
            expect(')');
            facts.concepts.push_back({name, arg1});
        }
        skip_ws();
        if (i != line.size())
            throw ParseError("trailing characters after fact", lineno, (int)i + 1);
    }
    return facts;
}

inline std::string serialize_facts(const Database& db) {
    std::ostringstream out;
    for (const auto& f : db.all_concept_facts())
        out << f.name << "(" << f.individual << ")\n";
    for (const auto& f : db.all_role_facts())
        out << f.name << "(" << f.source << "," << f.target << ")\n";
    for (const auto& f : db.all_feature_facts())
        out << f.name << "(" << f.individual << ", " << f.value.str() << ")\n";
    return out.str();
}

}  // namespace dlfit
