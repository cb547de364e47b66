#include "polycsp/reductions.hpp"

#include "polycsp/oracle.hpp"
#include "polycsp/qcsp.hpp"

#include <algorithm>
#include <set>

namespace polycsp {

FewDefinition to_few_definition(const PpDefinition& def) {
    FewDefinition out;
    out.target = def.target;
    out.free_vars = def.free_vars;
    for (const std::string& v : def.bound_vars) out.bound_vars.emplace_back(Quantifier::Exists, v);
    out.body = def.body;
    return out;
}

namespace {

bool eval_atom(const BodyAtom& atom, const ConstraintLanguage& lang, const Assignment& a) {
    if (const Constraint* c = std::get_if<Constraint>(&atom)) return eval_constraint(*c, lang, a);
    const EqualityAtom& eq = std::get<EqualityAtom>(atom);
    return a.at(eq.left) == a.at(eq.right);
}

bool eval_body(const std::vector<BodyAtom>& body, const ConstraintLanguage& lang,
               const Assignment& a) {
    for (const BodyAtom& atom : body)
        if (!eval_atom(atom, lang, a)) return false;
    return true;
}

void check_eval_budget(std::size_t variable_count, const Budget& budget) {
    if (variable_count > static_cast<std::size_t>(budget.brute_vars))
        throw BudgetError("definition evaluation limited to " + std::to_string(budget.brute_vars) +
                          " variables");
}

bool few_game(const FewDefinition& def, const ConstraintLanguage& lang, std::size_t depth,
              Assignment& a) {
    if (depth == def.bound_vars.size()) return eval_body(def.body, lang, a);
    const auto& [q, var] = def.bound_vars[depth];
    const int d = lang.domain_size();
    bool result = q == Quantifier::Forall;
    for (int v = 0; v < d; ++v) {
        a[var] = v;
        const bool sub = few_game(def, lang, depth + 1, a);
        if (q == Quantifier::Forall) result = result && sub;
        else result = result || sub;
        if (result != (q == Quantifier::Forall)) break;
    }
    a.erase(var);
    return result;
}

} // namespace

Relation eval_pp_definition(const PpDefinition& def, const ConstraintLanguage& lang,
                            const Budget& budget) {
    return eval_few_definition(to_few_definition(def), lang, budget);
}

namespace {

void check_distinct_names(const FewDefinition& def) {
    std::set<std::string> seen;
    for (const std::string& v : def.free_vars)
        if (!seen.insert(v).second) throw ValidationError("definition reuses variable " + v);
    for (const auto& [q, v] : def.bound_vars) {
        (void)q;
        if (!seen.insert(v).second) throw ValidationError("definition reuses variable " + v);
    }
}

} // namespace

Relation eval_few_definition(const FewDefinition& def, const ConstraintLanguage& lang,
                             const Budget& budget) {
    check_distinct_names(def);
    check_eval_budget(def.free_vars.size() + def.bound_vars.size(), budget);
    const int d = lang.domain_size();
    const int k = static_cast<int>(def.free_vars.size());
    std::vector<Tuple> tuples;
    const std::size_t total = checked_power(d, k);
    for (std::size_t r = 0; r < total; ++r) {
        Tuple values = tuple_from_rank(r, k, d);
        Assignment a;
        for (int i = 0; i < k; ++i) a[def.free_vars[static_cast<std::size_t>(i)]] = values[static_cast<std::size_t>(i)];
        if (few_game(def, lang, 0, a)) tuples.push_back(std::move(values));
    }
    return Relation(def.target, k, d, std::move(tuples));
}

// --- constructive definability ------------------------------------------------

namespace {

std::string point_name(const Tuple& point) {
    std::string name = "p";
    for (int v : point) name += static_cast<char>('0' + v);
    return name;
}

// True iff some single value can be assigned to every variable of every
// relation simultaneously; such a language admits no unsatisfiable body.
std::optional<PpDefinition> synthesize_empty(const Relation& r, const ConstraintLanguage& lang) {
    PpDefinition def;
    def.target = r.name();
    for (int j = 0; j < r.arity(); ++j) def.free_vars.push_back("v" + std::to_string(j));

    for (const auto& [name, rel] : lang.relations()) {
        if (!rel.is_empty()) continue;
        // A constraint over an empty relation is unsatisfiable on its own.
        Constraint c;
        c.relation = name;
        for (int j = 0; j < rel.arity(); ++j) def.bound_vars.push_back("x" + std::to_string(j));
        c.vars = def.bound_vars;
        def.body.emplace_back(std::move(c));
        return def;
    }

    if (lang.relations().empty()) return std::nullopt;
    for (int c = 0; c < lang.domain_size(); ++c) {
        bool everywhere = true;
        for (const auto& [name, rel] : lang.relations()) {
            (void)name;
            const Tuple diag(static_cast<std::size_t>(rel.arity()), c);
            if (!rel.contains(diag)) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) return std::nullopt; // every conjunction is satisfied all-c
    }
    // No value fits every diagonal, so constraining one variable by every
    // relation at once cannot be satisfied.
    def.bound_vars.push_back("x");
    for (const auto& [name, rel] : lang.relations()) {
        Constraint c;
        c.relation = name;
        c.vars.assign(static_cast<std::size_t>(rel.arity()), "x");
        def.body.emplace_back(std::move(c));
    }
    return def;
}

} // namespace

std::optional<PpDefinition> synthesize_pp_definition(const Relation& r,
                                                     const ConstraintLanguage& lang,
                                                     const Budget& budget) {
    if (r.domain_size() != lang.domain_size()) throw ValidationError("domain size mismatch");
    if (!pp_closure(r, lang, budget).same_tuples(r)) return std::nullopt;

    const int d = r.domain_size();
    const int k = r.arity();
    const int m = static_cast<int>(r.size());
    if (m == 0) return synthesize_empty(r, lang);

    // The binary diagonal is expressible by a single equality atom.
    if (k == 2 && m == d) {
        bool diagonal = true;
        for (const Tuple& t : r.tuples())
            if (t[0] != t[1]) diagonal = false;
        if (diagonal) {
            PpDefinition def;
            def.target = r.name();
            def.free_vars = {"v0", "v1"};
            def.body.emplace_back(EqualityAtom{"v0", "v1"});
            return def;
        }
    }

    PpDefinition def;
    def.target = r.name();

    // Free variables are the column points of r's stored tuple list; a column
    // seen before is aliased onto its first occurrence.
    std::set<std::string> used_points;
    for (int j = 0; j < k; ++j) {
        Tuple column(static_cast<std::size_t>(m), 0);
        for (int i = 0; i < m; ++i) column[static_cast<std::size_t>(i)] = r.tuples()[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        const std::string point = point_name(column);
        if (used_points.insert(point).second) {
            def.free_vars.push_back(point);
        } else {
            const std::string alias = point + "~" + std::to_string(j);
            def.free_vars.push_back(alias);
            def.body.emplace_back(EqualityAtom{alias, point});
        }
    }

    // Bound variables are the remaining points of D^m.
    const std::size_t space = checked_power(d, m);
    for (std::size_t p = 0; p < space; ++p) {
        const std::string point = point_name(tuple_from_rank(p, m, d));
        if (!used_points.count(point)) def.bound_vars.push_back(point);
    }

    // One constraint per relation and per length-m tuple sequence: the
    // variable at argument j is the point formed by column j of the sequence.
    // An assignment of the points satisfies all of them exactly when it is an
    // m-ary polymorphism of the language.
    std::set<std::pair<std::string, std::vector<std::string>>> seen;
    for (const auto& [name, rel] : lang.relations()) {
        if (rel.is_empty()) continue;
        const std::size_t count = rel.size();
        std::vector<std::size_t> idx(static_cast<std::size_t>(m), 0);
        while (true) {
            std::vector<std::string> vars;
            vars.reserve(static_cast<std::size_t>(rel.arity()));
            for (int j = 0; j < rel.arity(); ++j) {
                Tuple column(static_cast<std::size_t>(m), 0);
                for (int i = 0; i < m; ++i)
                    column[static_cast<std::size_t>(i)] =
                        rel.tuples()[idx[static_cast<std::size_t>(i)]][static_cast<std::size_t>(j)];
                vars.push_back(point_name(column));
            }
            if (seen.emplace(name, vars).second)
                def.body.emplace_back(Constraint{name, std::move(vars)});
            int pos = m - 1;
            while (pos >= 0) {
                if (++idx[static_cast<std::size_t>(pos)] < count) break;
                idx[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }

    if (!eval_pp_definition(def, lang, budget).same_tuples(r))
        throw Error("internal: synthesized definition does not evaluate to its target");
    return def;
}

// --- inlining ------------------------------------------------------------------

namespace {

class VariableMerge {
public:
    const std::string& find(const std::string& v) {
        auto it = parent_.find(v);
        if (it == parent_.end()) return v;
        const std::string& root = find(it->second);
        it->second = root;
        return it->second;
    }

    // Merges the two classes, keeping the lexicographically smaller root.
    void merge(const std::string& a, const std::string& b) {
        std::string ra = find(a), rb = find(b);
        if (ra == rb) return;
        if (rb < ra) std::swap(ra, rb);
        parent_[rb] = ra;
    }

private:
    std::map<std::string, std::string> parent_;
};

std::string fresh_name(std::string candidate, const std::set<std::string>& taken) {
    while (taken.count(candidate)) candidate += "'";
    return candidate;
}

struct InlinedBody {
    std::vector<Constraint> constraints;
    std::vector<EqualityAtom> equalities;
    // Fresh bound variable names with their quantifiers, in introduction order.
    std::vector<std::pair<Quantifier, std::string>> introduced;
};

InlinedBody inline_constraints(const std::vector<Constraint>& constraints,
                               const std::map<std::string, FewDefinition>& defs,
                               std::set<std::string> taken) {
    InlinedBody out;
    for (std::size_t ci = 0; ci < constraints.size(); ++ci) {
        const Constraint& c = constraints[ci];
        auto it = defs.find(c.relation);
        if (it == defs.end()) throw ValidationError("missing definition for relation " + c.relation);
        const FewDefinition& def = it->second;
        if (def.free_vars.size() != c.vars.size())
            throw ValidationError("definition arity mismatch for relation " + c.relation);

        std::map<std::string, std::string> substitution;
        for (std::size_t j = 0; j < def.free_vars.size(); ++j)
            substitution[def.free_vars[j]] = c.vars[j];
        for (const auto& [q, bound] : def.bound_vars) {
            const std::string name =
                fresh_name(std::to_string(ci) + "." + bound, taken);
            taken.insert(name);
            substitution[bound] = name;
            out.introduced.emplace_back(q, name);
        }

        for (const BodyAtom& atom : def.body) {
            if (const Constraint* bc = std::get_if<Constraint>(&atom)) {
                Constraint replaced;
                replaced.relation = bc->relation;
                for (const std::string& v : bc->vars) replaced.vars.push_back(substitution.at(v));
                out.constraints.push_back(std::move(replaced));
            } else {
                const EqualityAtom& eq = std::get<EqualityAtom>(atom);
                out.equalities.push_back({substitution.at(eq.left), substitution.at(eq.right)});
            }
        }
    }
    return out;
}

} // namespace

CspInstance inline_reduce_csp(const CspInstance& inst,
                              const std::map<std::string, PpDefinition>& defs,
                              LanguagePtr target_language) {
    std::map<std::string, FewDefinition> few;
    for (const auto& [name, def] : defs) few.emplace(name, to_few_definition(def));

    std::set<std::string> taken(inst.variables().begin(), inst.variables().end());
    InlinedBody body = inline_constraints(inst.constraints(), few, taken);

    VariableMerge merge;
    for (const EqualityAtom& eq : body.equalities) merge.merge(eq.left, eq.right);

    std::vector<std::string> variables;
    std::set<std::string> kept;
    auto keep = [&](const std::string& v) {
        const std::string& root = merge.find(v);
        if (kept.insert(root).second) variables.push_back(root);
    };
    for (const std::string& v : inst.variables()) keep(v);
    for (const auto& [q, v] : body.introduced) {
        (void)q;
        keep(v);
    }

    std::vector<Constraint> constraints;
    for (Constraint& c : body.constraints) {
        for (std::string& v : c.vars) v = merge.find(v);
        constraints.push_back(std::move(c));
    }
    return CspInstance(std::move(target_language), std::move(variables), std::move(constraints));
}

QcspReduction inline_reduce_qcsp(const QcspInstance& inst,
                                 const std::map<std::string, FewDefinition>& defs,
                                 LanguagePtr target_language) {
    std::set<std::string> taken(inst.base().variables().begin(), inst.base().variables().end());
    InlinedBody body = inline_constraints(inst.base().constraints(), defs, taken);

    // Definition quantifiers go to the end of the prefix, in constraint order.
    std::vector<std::pair<Quantifier, std::string>> prefix = inst.prefix();
    prefix.insert(prefix.end(), body.introduced.begin(), body.introduced.end());
    std::vector<Constraint> constraints = std::move(body.constraints);

    // Equalities are processed one by one against the current prefix: the
    // later variable is removed, unless it is universal, which falsifies the
    // whole formula.
    std::vector<EqualityAtom> pending = std::move(body.equalities);
    for (std::size_t i = 0; i < pending.size(); ++i) {
        std::string u = pending[i].left;
        std::string v = pending[i].right;
        if (u == v) continue;
        std::size_t pos_u = prefix.size(), pos_v = prefix.size();
        for (std::size_t p = 0; p < prefix.size(); ++p) {
            if (prefix[p].second == u) pos_u = p;
            if (prefix[p].second == v) pos_v = p;
        }
        if (pos_u == prefix.size() || pos_v == prefix.size())
            throw Error("internal: equality over unquantified variable");
        if (pos_u > pos_v) {
            std::swap(u, v);
            std::swap(pos_u, pos_v);
        }
        if (prefix[pos_v].first == Quantifier::Forall) return ConstantFalse{};
        prefix.erase(prefix.begin() + static_cast<std::ptrdiff_t>(pos_v));
        for (Constraint& c : constraints)
            for (std::string& var : c.vars)
                if (var == v) var = u;
        for (std::size_t j = i + 1; j < pending.size(); ++j) {
            if (pending[j].left == v) pending[j].left = u;
            if (pending[j].right == v) pending[j].right = u;
        }
    }

    std::vector<std::string> variables;
    for (const auto& [q, name] : prefix) {
        (void)q;
        variables.push_back(name);
    }
    CspInstance base(std::move(target_language), std::move(variables), std::move(constraints));
    return QcspInstance(std::move(base), std::move(prefix));
}

// --- spread expression ------------------------------------------------------------

Relation spread_express(const FewDefinition& def, const ConstraintLanguage& lang,
                        const Budget& budget) {
    if (lang.domain_size() != 2)
        throw PreconditionError("spread expression is implemented for domain size 2");
    check_distinct_names(def);
    const int k = static_cast<int>(def.free_vars.size());
    const int m = static_cast<int>(def.bound_vars.size());
    check_eval_budget(static_cast<std::size_t>(k + m + 2), budget);

    // Quantifier-free inner relation over (free..., bound...), then two extra
    // columns that the base case ignores.
    std::vector<std::string> columns = def.free_vars;
    for (const auto& [q, v] : def.bound_vars) {
        (void)q;
        columns.push_back(v);
    }
    std::set<Tuple> current;
    const std::size_t total = checked_power(2, k + m);
    for (std::size_t r = 0; r < total; ++r) {
        Tuple values = tuple_from_rank(r, k + m, 2);
        Assignment a;
        for (std::size_t i = 0; i < columns.size(); ++i) a[columns[i]] = values[i];
        if (!eval_body(def.body, lang, a)) continue;
        for (int y1 = 0; y1 < 2; ++y1)
            for (int y2 = 0; y2 < 2; ++y2) {
                Tuple extended = values;
                extended.push_back(y1);
                extended.push_back(y2);
                current.insert(std::move(extended));
            }
    }

    // Eliminate bound columns innermost first. The bound column sits at index
    // k + j; the two extra columns are always the last two.
    for (int j = m - 1; j >= 0; --j) {
        const std::size_t col = static_cast<std::size_t>(k + j);
        std::set<Tuple> next;
        if (def.bound_vars[static_cast<std::size_t>(j)].first == Quantifier::Exists) {
            for (const Tuple& t : current) {
                Tuple projected;
                projected.reserve(t.size() - 1);
                for (std::size_t i = 0; i < t.size(); ++i)
                    if (i != col) projected.push_back(t[i]);
                next.insert(std::move(projected));
            }
        } else {
            // Keep (a..., y1, y2) when substituting either extra argument for
            // the bound column stays inside the current relation.
            const std::size_t arity = static_cast<std::size_t>(k + j) + 2;
            const std::size_t candidates = checked_power(2, static_cast<int>(arity));
            for (std::size_t r = 0; r < candidates; ++r) {
                Tuple candidate = tuple_from_rank(r, static_cast<int>(arity), 2);
                const int y1 = candidate[arity - 2];
                const int y2 = candidate[arity - 1];
                bool inside = true;
                for (int y : {y1, y2}) {
                    Tuple probe = candidate;
                    probe.insert(probe.begin() + static_cast<std::ptrdiff_t>(col), y);
                    if (!current.count(probe)) {
                        inside = false;
                        break;
                    }
                }
                if (inside) next.insert(std::move(candidate));
            }
        }
        current = std::move(next);
    }

    return Relation(def.target + "_spread", k + 2, 2,
                    std::vector<Tuple>(current.begin(), current.end()));
}

// --- prefix-preserving rewriting -----------------------------------------------------

QcspInstance bounded_alt_reduce(const QcspInstance& inst,
                                const std::map<std::string, Relation>& spread) {
    const PrefixClass cls = classify_prefix(prefix_pattern(inst));
    const bool supported =
        (cls.leading == Quantifier::Forall && cls.level >= 2 && cls.level % 2 == 0) ||
        (cls.leading == Quantifier::Exists && cls.level >= 3 && cls.level % 2 == 1);
    if (!supported)
        throw PreconditionError("prefix class " + to_string(cls) +
                                " has no innermost-existential certified form");

    std::set<std::string> taken(inst.base().variables().begin(), inst.base().variables().end());
    const std::string y1 = fresh_name("y1", taken);
    taken.insert(y1);
    const std::string y2 = fresh_name("y2", taken);

    // The outermost universal block: the very front for a leading-forall
    // prefix, otherwise the start of the second block.
    std::vector<std::pair<Quantifier, std::string>> prefix = inst.prefix();
    std::size_t insert_at = 0;
    if (cls.leading == Quantifier::Exists) {
        while (insert_at < prefix.size() && prefix[insert_at].first == Quantifier::Exists)
            ++insert_at;
    }
    prefix.insert(prefix.begin() + static_cast<std::ptrdiff_t>(insert_at),
                  {{Quantifier::Forall, y1}, {Quantifier::Forall, y2}});

    auto language = std::make_shared<ConstraintLanguage>(inst.base().language().domain_size());
    std::vector<Constraint> constraints;
    for (const Constraint& c : inst.base().constraints()) {
        auto it = spread.find(c.relation);
        if (it == spread.end())
            throw ValidationError("missing spread relation for " + c.relation);
        const Relation& wide = it->second;
        if (wide.arity() != static_cast<int>(c.vars.size()) + 2)
            throw ValidationError("spread relation for " + c.relation + " has wrong arity");
        if (!language->has(wide.name())) language->add(wide);
        Constraint rc;
        rc.relation = wide.name();
        rc.vars = c.vars;
        rc.vars.push_back(y1);
        rc.vars.push_back(y2);
        constraints.push_back(std::move(rc));
    }

    std::vector<std::string> variables = inst.base().variables();
    variables.push_back(y1);
    variables.push_back(y2);
    CspInstance base(std::move(language), std::move(variables), std::move(constraints));
    return QcspInstance(std::move(base), std::move(prefix));
}

// --- hardness gadgets -------------------------------------------------------------------

Relation lift_with_constants(const Relation& r) {
    if (r.domain_size() != 2) throw PreconditionError("lifting is defined over {0,1}");
    std::vector<Tuple> tuples;
    for (const Tuple& t : r.tuples())
        for (int y = 0; y < 2; ++y) {
            Tuple extended = t;
            extended.push_back(y);
            tuples.push_back(std::move(extended));
        }
    tuples.emplace_back(static_cast<std::size_t>(r.arity()) + 1, 0);
    tuples.emplace_back(static_cast<std::size_t>(r.arity()) + 1, 1);
    return Relation(r.name() + "_lift", r.arity() + 1, 2, std::move(tuples));
}

QcspInstance lift_with_constants_instance(const QcspInstance& inst) {
    std::set<std::string> taken(inst.base().variables().begin(), inst.base().variables().end());
    const std::string y = fresh_name("y", taken);

    auto language = std::make_shared<ConstraintLanguage>(2);
    for (const auto& [name, rel] : inst.base().language().relations()) {
        (void)name;
        language->add(lift_with_constants(rel));
    }
    std::vector<Constraint> constraints;
    for (const Constraint& c : inst.base().constraints()) {
        Constraint lifted;
        lifted.relation = c.relation + "_lift";
        lifted.vars = c.vars;
        lifted.vars.push_back(y);
        constraints.push_back(std::move(lifted));
    }
    std::vector<std::string> variables = inst.base().variables();
    variables.push_back(y);
    std::vector<std::pair<Quantifier, std::string>> prefix = inst.prefix();
    prefix.emplace_back(Quantifier::Forall, y);
    CspInstance base(std::move(language), std::move(variables), std::move(constraints));
    return QcspInstance(std::move(base), std::move(prefix));
}

Relation negation_closure(const Relation& r) {
    if (r.domain_size() != 2) throw PreconditionError("negation closure is defined over {0,1}");
    std::vector<Tuple> tuples;
    for (const Tuple& t : r.tuples()) {
        Tuple plain = {0};
        Tuple flipped = {1};
        for (int v : t) {
            plain.push_back(v);
            flipped.push_back(1 - v);
        }
        tuples.push_back(std::move(plain));
        tuples.push_back(std::move(flipped));
    }
    return Relation(r.name() + "_nc", r.arity() + 1, 2, std::move(tuples));
}

namespace {

struct PivotParts {
    LanguagePtr language;
    std::vector<std::string> variables;
    std::vector<Constraint> constraints;
    std::string pivot;
};

PivotParts pivot_parts(const CspInstance& inst) {
    std::set<std::string> taken(inst.variables().begin(), inst.variables().end());
    PivotParts parts;
    parts.pivot = fresh_name("b0", taken);

    auto language = std::make_shared<ConstraintLanguage>(2);
    for (const auto& [name, rel] : inst.language().relations()) {
        (void)name;
        language->add(negation_closure(rel));
    }
    parts.language = std::move(language);
    for (const Constraint& c : inst.constraints()) {
        Constraint closed;
        closed.relation = c.relation + "_nc";
        closed.vars.push_back(parts.pivot);
        closed.vars.insert(closed.vars.end(), c.vars.begin(), c.vars.end());
        parts.constraints.push_back(std::move(closed));
    }
    parts.variables.push_back(parts.pivot);
    parts.variables.insert(parts.variables.end(), inst.variables().begin(),
                           inst.variables().end());
    return parts;
}

} // namespace

CspInstance negation_closure_instance(const CspInstance& inst) {
    PivotParts parts = pivot_parts(inst);
    return CspInstance(std::move(parts.language), std::move(parts.variables),
                       std::move(parts.constraints));
}

QcspInstance negation_closure_instance(const QcspInstance& inst, Quantifier pivot_quantifier) {
    PivotParts parts = pivot_parts(inst.base());
    std::vector<std::pair<Quantifier, std::string>> prefix;
    prefix.emplace_back(pivot_quantifier, parts.pivot);
    prefix.insert(prefix.end(), inst.prefix().begin(), inst.prefix().end());
    CspInstance base(std::move(parts.language), std::move(parts.variables),
                     std::move(parts.constraints));
    return QcspInstance(std::move(base), std::move(prefix));
}

} // namespace polycsp
