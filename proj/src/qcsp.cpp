#include "polycsp/qcsp.hpp"

#include "polycsp/algebra.hpp"

#include <algorithm>
#include <set>

namespace polycsp {

PrefixPattern prefix_pattern(const QcspInstance& inst) {
    PrefixPattern pattern;
    for (const auto& [q, v] : inst.prefix()) {
        (void)v;
        if (pattern.blocks.empty() || pattern.blocks.back().quantifier != q)
            pattern.blocks.push_back({q, 1});
        else
            ++pattern.blocks.back().count;
    }
    return pattern;
}

PrefixClass classify_prefix(const PrefixPattern& pattern) {
    if (pattern.blocks.empty()) return {Quantifier::Exists, 1};
    return {pattern.blocks.front().quantifier, static_cast<int>(pattern.blocks.size())};
}

std::string to_string(const PrefixClass& cls) {
    return (cls.leading == Quantifier::Exists ? "Sigma_" : "Pi_") + std::to_string(cls.level);
}

AssignmentFamily family_at_most(int j, int value) {
    if (j < 0) throw ValidationError("family bound must be non-negative");
    if (value != 0 && value != 1) throw ValidationError("family value must be boolean");
    return AssignmentFamily{{FamilyPart{j, value}}};
}

AssignmentFamily family_union(AssignmentFamily a, const AssignmentFamily& b) {
    a.parts.insert(a.parts.end(), b.parts.begin(), b.parts.end());
    return a;
}

std::string to_string(const AssignmentFamily& fam) {
    std::string out;
    for (std::size_t i = 0; i < fam.parts.size(); ++i) {
        if (i) out += " u ";
        out += "[<=" + std::to_string(fam.parts[i].max_hits) + "," +
               (fam.parts[i].value ? "true" : "false") + "]";
    }
    return out;
}

namespace {

bool family_contains(const AssignmentFamily& fam, const Tuple& values) {
    for (const FamilyPart& part : fam.parts) {
        int hits = 0;
        for (int v : values)
            if (v == part.value) ++hits;
        if (hits <= part.max_hits) return true;
    }
    return false;
}

// Members as value vectors, ordered with 1 before 0 so the all-true
// assignment is first and the hit count grows along the enumeration.
std::vector<Tuple> family_value_vectors(const AssignmentFamily& fam, std::size_t n,
                                        const Budget& budget) {
    if (n > static_cast<std::size_t>(budget.brute_vars))
        throw BudgetError("family enumeration limited to " + std::to_string(budget.brute_vars) +
                          " universal variables");
    std::vector<Tuple> out;
    const std::size_t total = checked_power(2, static_cast<int>(n));
    for (std::size_t r = 0; r < total; ++r) {
        Tuple values = tuple_from_rank(r, static_cast<int>(n), 2);
        for (int& v : values) v = 1 - v;
        if (family_contains(fam, values)) out.push_back(std::move(values));
    }
    return out;
}

} // namespace

std::vector<Assignment> enumerate_family(const AssignmentFamily& fam,
                                         const std::vector<std::string>& universals,
                                         const Budget& budget) {
    std::vector<Assignment> out;
    for (const Tuple& values : family_value_vectors(fam, universals.size(), budget)) {
        Assignment a;
        for (std::size_t i = 0; i < universals.size(); ++i) a[universals[i]] = values[i];
        out.push_back(std::move(a));
    }
    return out;
}

namespace {

std::vector<AssignmentFamily> sound_bases(SchaeferOp op) {
    switch (op) {
        case SchaeferOp::And:
            return {family_at_most(1, 0)};
        case SchaeferOp::Or:
            return {family_at_most(1, 1)};
        case SchaeferOp::Majority:
            return {family_at_most(2, 0), family_at_most(2, 1),
                    family_union(family_at_most(1, 0), family_at_most(0, 1)),
                    family_union(family_at_most(1, 1), family_at_most(0, 0))};
        case SchaeferOp::Minority:
            return {family_at_most(2, 0), family_at_most(2, 1)};
        default:
            return {};
    }
}

bool covers(const AssignmentFamily& fam, const AssignmentFamily& base, std::size_t n,
            const Budget& budget) {
    std::set<Tuple> have;
    for (Tuple& t : family_value_vectors(fam, n, budget)) have.insert(std::move(t));
    for (const Tuple& t : family_value_vectors(base, n, budget))
        if (!have.count(t)) return false;
    return true;
}

} // namespace

AssignmentFamily default_family_for(const ConstraintLanguage& lang) {
    for (SchaeferOp op : schaefer_witnesses(lang)) {
        switch (op) {
            case SchaeferOp::And: return family_at_most(1, 0);
            case SchaeferOp::Or: return family_at_most(1, 1);
            case SchaeferOp::Majority: return family_at_most(2, 0);
            case SchaeferOp::Minority: return family_at_most(2, 0);
            default: break;
        }
    }
    throw PreconditionError("no qualifying operation: the language is preserved by none of "
                            "and, or, majority, minority");
}

Pi2Result pi2_decide(const QcspInstance& inst, const AssignmentFamily& fam,
                     const CspSolver& base, const Budget& budget) {
    const PrefixClass cls = classify_prefix(prefix_pattern(inst));
    const bool degenerate = cls.level == 1;
    const bool pi2 = cls.level == 2 && cls.leading == Quantifier::Forall;
    if (!degenerate && !pi2)
        throw PreconditionError("prefix class " + to_string(cls) +
                                " is outside the universal-then-existential fragment");

    const ConstraintLanguage& lang = inst.base().language();
    const std::vector<std::string> universals = inst.universal_variables();
    bool sound = false;
    for (SchaeferOp op : schaefer_witnesses(lang)) {
        for (const AssignmentFamily& b : sound_bases(op))
            if (covers(fam, b, universals.size(), budget)) {
                sound = true;
                break;
            }
        if (sound) break;
    }
    if (!sound)
        throw PreconditionError("family " + to_string(fam) +
                                " is not sound for any qualifying polymorphism of the language");

    const std::vector<std::string> existentials = inst.existential_variables();
    std::set<std::string> universal_set(universals.begin(), universals.end());

    for (const Assignment& member : enumerate_family(fam, universals, budget)) {
        // Residual instance over the existential variables.
        auto residual_lang = std::make_shared<ConstraintLanguage>(lang.domain_size());
        std::vector<Constraint> residual_constraints;
        bool member_fails = false;

        for (std::size_t ci = 0; ci < inst.base().constraints().size() && !member_fails; ++ci) {
            const Constraint& c = inst.base().constraints()[ci];
            const Relation& r = lang.relation(c.relation);
            std::vector<std::size_t> open_positions;
            for (std::size_t pos = 0; pos < c.vars.size(); ++pos)
                if (!universal_set.count(c.vars[pos])) open_positions.push_back(pos);

            std::vector<Tuple> sliced;
            for (const Tuple& t : r.tuples()) {
                bool agrees = true;
                for (std::size_t pos = 0; pos < c.vars.size() && agrees; ++pos) {
                    auto it = member.find(c.vars[pos]);
                    if (it != member.end() && it->second != t[pos]) agrees = false;
                }
                if (!agrees) continue;
                Tuple projected;
                for (std::size_t pos : open_positions) projected.push_back(t[pos]);
                sliced.push_back(std::move(projected));
            }

            if (open_positions.empty()) {
                if (sliced.empty()) member_fails = true; // fully instantiated and violated
                continue;
            }
            const std::string name = c.relation + "@" + std::to_string(ci);
            residual_lang->add(Relation(name, static_cast<int>(open_positions.size()),
                                        lang.domain_size(), std::move(sliced)));
            Constraint rc;
            rc.relation = name;
            for (std::size_t pos : open_positions) rc.vars.push_back(c.vars[pos]);
            residual_constraints.push_back(std::move(rc));
        }

        if (!member_fails) {
            CspInstance residual(std::move(residual_lang), existentials,
                                 std::move(residual_constraints));
            member_fails = !base(residual).has_value();
        }
        if (member_fails) return {false, member};
    }
    return {true, std::nullopt};
}

} // namespace polycsp
