#include "polycsp/equality.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace polycsp {

// --- EqFormula -----------------------------------------------------------------

EqFormula EqFormula::equal(std::string left, std::string right) {
    Node n{Kind::Equal, true, std::move(left), std::move(right), nullptr, nullptr};
    return EqFormula(std::move(n));
}

EqFormula EqFormula::not_equal(std::string left, std::string right) {
    Node n{Kind::NotEqual, false, std::move(left), std::move(right), nullptr, nullptr};
    return EqFormula(std::move(n));
}

EqFormula EqFormula::conjunction(EqFormula left, EqFormula right) {
    const bool positive = left.positive() && right.positive();
    Node n{Kind::And, positive, {}, {}, std::make_shared<EqFormula>(std::move(left)),
           std::make_shared<EqFormula>(std::move(right))};
    return EqFormula(std::move(n));
}

EqFormula EqFormula::disjunction(EqFormula left, EqFormula right) {
    const bool positive = left.positive() && right.positive();
    Node n{Kind::Or, positive, {}, {}, std::make_shared<EqFormula>(std::move(left)),
           std::make_shared<EqFormula>(std::move(right))};
    return EqFormula(std::move(n));
}

EqFormula EqFormula::negation(EqFormula inner) {
    Node n{Kind::Not, false, {}, {}, std::make_shared<EqFormula>(std::move(inner)), nullptr};
    return EqFormula(std::move(n));
}

namespace {

void collect_vars(const EqFormula& f, std::set<std::string>& out) {
    switch (f.kind()) {
        case EqFormula::Kind::Equal:
        case EqFormula::Kind::NotEqual:
            out.insert(f.left_var());
            out.insert(f.right_var());
            return;
        case EqFormula::Kind::Not:
            collect_vars(f.left(), out);
            return;
        case EqFormula::Kind::And:
        case EqFormula::Kind::Or:
            collect_vars(f.left(), out);
            collect_vars(f.right(), out);
            return;
    }
}

} // namespace

std::vector<std::string> EqFormula::variables() const {
    std::set<std::string> vars;
    collect_vars(*this, vars);
    return {vars.begin(), vars.end()};
}

std::string EqFormula::to_string() const {
    switch (kind()) {
        case Kind::Equal: return "(" + left_var() + "=" + right_var() + ")";
        case Kind::NotEqual: return "(" + left_var() + "!=" + right_var() + ")";
        case Kind::Not: return "!" + left().to_string();
        case Kind::And: return "(" + left().to_string() + " & " + right().to_string() + ")";
        case Kind::Or: return "(" + left().to_string() + " | " + right().to_string() + ")";
    }
    throw Error("internal: unknown formula node");
}

// --- Partition -----------------------------------------------------------------

Partition::Partition(const std::vector<std::vector<std::string>>& blocks) {
    int id = 0;
    for (const auto& block : blocks) {
        if (block.empty()) throw ValidationError("partition blocks must be non-empty");
        for (const std::string& v : block)
            if (!block_of_.emplace(v, id).second)
                throw ValidationError("variable " + v + " sits in two blocks");
        ++id;
    }
    blocks_ = static_cast<std::size_t>(id);
}

Partition Partition::from_block_ids(const std::vector<std::string>& vars,
                                    const std::vector<int>& block_ids) {
    if (vars.size() != block_ids.size())
        throw ValidationError("one block id per variable expected");
    Partition p({});
    int max_id = -1;
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (!p.block_of_.emplace(vars[i], block_ids[i]).second)
            throw ValidationError("duplicate variable " + vars[i]);
        max_id = std::max(max_id, block_ids[i]);
    }
    p.blocks_ = static_cast<std::size_t>(max_id + 1);
    return p;
}

bool Partition::same_block(const std::string& u, const std::string& v) const {
    auto iu = block_of_.find(u);
    auto iv = block_of_.find(v);
    if (iu == block_of_.end() || iv == block_of_.end())
        throw ValidationError("partition does not cover a compared variable");
    return iu->second == iv->second;
}

bool Partition::covers(const std::string& v) const { return block_of_.count(v) > 0; }

// --- parsing -------------------------------------------------------------------

namespace {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(message + " at offset " + std::to_string(pos));
    }

    std::string identifier() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                text[pos] == '\''))
            ++pos;
        if (start == pos) fail("expected an identifier");
        return text.substr(start, pos - start);
    }

    // formula := disjunct ('|' disjunct)*
    // disjunct := conjunct ('&' conjunct)*
    // conjunct := '!' conjunct | '(' formula ')' | atom
    // atom := ident ('=' | '!=') ident
    EqFormula formula() {
        EqFormula f = disjunct();
        while (true) {
            skip_ws();
            if (pos < text.size() && text[pos] == '|') {
                ++pos;
                f = EqFormula::disjunction(std::move(f), disjunct());
            } else {
                return f;
            }
        }
    }

    EqFormula disjunct() {
        EqFormula f = conjunct();
        while (true) {
            skip_ws();
            if (pos < text.size() && text[pos] == '&') {
                ++pos;
                f = EqFormula::conjunction(std::move(f), conjunct());
            } else {
                return f;
            }
        }
    }

    EqFormula conjunct() {
        skip_ws();
        if (pos < text.size() && text[pos] == '!' &&
            (pos + 1 >= text.size() || text[pos + 1] != '=')) {
            ++pos;
            return EqFormula::negation(conjunct());
        }
        if (eat('(')) {
            // Either a parenthesized formula or a parenthesized atom; the
            // grammar treats both uniformly.
            EqFormula f = formula();
            if (!eat(')')) fail("expected ')'");
            return f;
        }
        return atom();
    }

    EqFormula atom() {
        std::string left = identifier();
        skip_ws();
        if (pos + 1 < text.size() && text[pos] == '!' && text[pos + 1] == '=') {
            pos += 2;
            return EqFormula::not_equal(std::move(left), identifier());
        }
        if (pos < text.size() && text[pos] == '=') {
            ++pos;
            return EqFormula::equal(std::move(left), identifier());
        }
        fail("expected '=' or '!='");
    }
};

} // namespace

PositiveQcsp parse_eq_formula(const std::string& text) {
    Parser p{text};
    std::vector<std::pair<Quantifier, std::string>> prefix;
    while (true) {
        p.skip_ws();
        if (p.pos < text.size() && (text[p.pos] == 'A' || text[p.pos] == 'E')) {
            // Quantifier tokens are single letters followed by a variable and
            // a dot; anything else is the start of the matrix.
            std::size_t save = p.pos;
            const char q = text[p.pos];
            ++p.pos;
            if (p.pos < text.size() &&
                (std::isspace(static_cast<unsigned char>(text[p.pos])) || text[p.pos] == '(')) {
                std::string var = p.identifier();
                if (!p.eat('.')) p.fail("expected '.' after a quantified variable");
                prefix.emplace_back(q == 'A' ? Quantifier::Forall : Quantifier::Exists,
                                    std::move(var));
                continue;
            }
            p.pos = save;
        }
        break;
    }
    EqFormula matrix = p.formula();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");

    std::set<std::string> quantified;
    for (const auto& [q, v] : prefix) {
        (void)q;
        if (!quantified.insert(v).second) throw ParseError("variable " + v + " quantified twice");
    }
    for (const std::string& v : matrix.variables())
        if (!quantified.count(v)) throw ParseError("variable " + v + " is not quantified");
    if (quantified.size() != matrix.variables().size())
        throw ParseError("prefix quantifies a variable the matrix never uses");
    return {std::move(prefix), std::move(matrix)};
}

std::string serialize_eq_formula(const PositiveQcsp& formula) {
    std::string out;
    for (const auto& [q, v] : formula.prefix)
        out += std::string(q == Quantifier::Forall ? "A " : "E ") + v + " . ";
    return out + formula.matrix.to_string();
}

// --- semantics ------------------------------------------------------------------

bool eval_under_partition(const EqFormula& formula, const Partition& partition) {
    switch (formula.kind()) {
        case EqFormula::Kind::Equal:
            return partition.same_block(formula.left_var(), formula.right_var());
        case EqFormula::Kind::NotEqual:
            return !partition.same_block(formula.left_var(), formula.right_var());
        case EqFormula::Kind::Not:
            return !eval_under_partition(formula.left(), partition);
        case EqFormula::Kind::And:
            return eval_under_partition(formula.left(), partition) &&
                   eval_under_partition(formula.right(), partition);
        case EqFormula::Kind::Or:
            return eval_under_partition(formula.left(), partition) ||
                   eval_under_partition(formula.right(), partition);
    }
    throw Error("internal: unknown formula node");
}

EqFormula positive_qcsp_reduce(const PositiveQcsp& formula) {
    if (!formula.matrix.positive())
        throw PreconditionError("the reduct is defined for positive matrices only");
    EqFormula out = formula.matrix;
    for (std::size_t j = 0; j < formula.prefix.size(); ++j) {
        if (formula.prefix[j].first != Quantifier::Forall) continue;
        for (std::size_t i = 0; i < j; ++i)
            out = EqFormula::conjunction(
                std::move(out),
                EqFormula::not_equal(formula.prefix[i].second, formula.prefix[j].second));
    }
    return out;
}

namespace {

void check_partition_budget(std::size_t n, const Budget& budget) {
    if (n > static_cast<std::size_t>(budget.partition_vars))
        throw BudgetError("partition enumeration limited to " +
                          std::to_string(budget.partition_vars) + " variables");
}

// Advances a restricted growth string (ids[0] = 0 and every entry at most one
// above the maximum of the earlier ones) to its lexicographic successor.
bool next_restricted_growth(std::vector<int>& ids) {
    for (std::size_t i = ids.size(); i-- > 1;) {
        int max_before = 0;
        for (std::size_t k = 0; k < i; ++k) max_before = std::max(max_before, ids[k]);
        if (ids[i] <= max_before) {
            ++ids[i];
            for (std::size_t k = i + 1; k < ids.size(); ++k) ids[k] = 0;
            return true;
        }
    }
    return false;
}

} // namespace

bool decide_positive_qcsp(const PositiveQcsp& formula, const Budget& budget) {
    const EqFormula reduct = positive_qcsp_reduce(formula);
    std::vector<std::string> vars;
    for (const auto& [q, v] : formula.prefix) {
        (void)q;
        vars.push_back(v);
    }
    check_partition_budget(vars.size(), budget);
    if (vars.empty()) return true; // the grammar cannot produce a closed matrix

    std::vector<int> ids(vars.size(), 0);
    do {
        if (eval_under_partition(reduct, Partition::from_block_ids(vars, ids))) return true;
    } while (next_restricted_growth(ids));
    return false;
}

namespace {

struct GameContext {
    const PositiveQcsp& formula;
    std::vector<std::string> vars;
};

bool game_eval(const GameContext& ctx, std::size_t depth, std::vector<int>& ids,
               int used_blocks) {
    if (depth == ctx.formula.prefix.size())
        return eval_under_partition(ctx.formula.matrix, Partition::from_block_ids(ctx.vars, ids));
    const Quantifier q = ctx.formula.prefix[depth].first;
    // The variable joins one of the blocks of the earlier variables or opens
    // a fresh one; over an infinite domain these are all the cases.
    for (int b = 0; b <= used_blocks; ++b) {
        ids[depth] = b;
        const bool sub = game_eval(ctx, depth + 1, ids, used_blocks + (b == used_blocks ? 1 : 0));
        if (q == Quantifier::Forall && !sub) return false;
        if (q == Quantifier::Exists && sub) return true;
    }
    return q == Quantifier::Forall;
}

} // namespace

bool game_oracle_eval(const PositiveQcsp& formula, const Budget& budget) {
    check_partition_budget(formula.prefix.size(), budget);
    if (formula.prefix.empty()) return true;
    GameContext ctx{formula, {}};
    for (const auto& [q, v] : formula.prefix) {
        (void)q;
        ctx.vars.push_back(v);
    }
    std::vector<int> ids(formula.prefix.size(), 0);
    return game_eval(ctx, 0, ids, 0);
}

} // namespace polycsp
