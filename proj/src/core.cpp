#include "polycsp/core.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace polycsp {

namespace {

std::string with_line(const std::string& message, int line) {
    if (line <= 0) return message;
    std::ostringstream os;
    os << "line " << line << ": " << message;
    return os.str();
}

} // namespace

ParseError::ParseError(const std::string& message, int line)
    : Error(with_line(message, line)), line_(line) {}

std::size_t checked_power(int base, int exponent) {
    if (base < 0 || exponent < 0) throw ValidationError("negative power");
    std::size_t result = 1;
    for (int i = 0; i < exponent; ++i) {
        if (base != 0 && result > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(base))
            throw BudgetError("table size overflow");
        result *= static_cast<std::size_t>(base);
    }
    return result;
}

std::size_t lex_rank(std::span<const int> tuple, int domain_size) {
    std::size_t rank = 0;
    for (int v : tuple) rank = rank * static_cast<std::size_t>(domain_size) + static_cast<std::size_t>(v);
    return rank;
}

Tuple tuple_from_rank(std::size_t rank, int arity, int domain_size) {
    Tuple t(static_cast<std::size_t>(arity), 0);
    for (int i = arity - 1; i >= 0; --i) {
        t[static_cast<std::size_t>(i)] = static_cast<int>(rank % static_cast<std::size_t>(domain_size));
        rank /= static_cast<std::size_t>(domain_size);
    }
    return t;
}

// --- Relation ----------------------------------------------------------------

Relation::Relation(std::string name, int arity, int domain_size, std::vector<Tuple> tuples)
    : name_(std::move(name)), arity_(arity), domain_size_(domain_size), tuples_(std::move(tuples)) {
    if (arity_ < 1) throw ValidationError("relation arity must be at least 1");
    if (domain_size_ < 2) throw ValidationError("domain size must be at least 2");
    for (const Tuple& t : tuples_) {
        if (static_cast<int>(t.size()) != arity_)
            throw ValidationError("tuple length differs from relation arity in " + name_);
        for (int v : t)
            if (v < 0 || v >= domain_size_)
                throw ValidationError("tuple value out of domain in " + name_);
    }
    std::sort(tuples_.begin(), tuples_.end());
    tuples_.erase(std::unique(tuples_.begin(), tuples_.end()), tuples_.end());
}

Relation Relation::full(std::string name, int arity, int domain_size) {
    std::vector<Tuple> tuples;
    const std::size_t n = checked_power(domain_size, arity);
    tuples.reserve(n);
    for (std::size_t r = 0; r < n; ++r) tuples.push_back(tuple_from_rank(r, arity, domain_size));
    return Relation(std::move(name), arity, domain_size, std::move(tuples));
}

Relation Relation::empty(std::string name, int arity, int domain_size) {
    return Relation(std::move(name), arity, domain_size, {});
}

bool Relation::is_full() const {
    return tuples_.size() == checked_power(domain_size_, arity_);
}

bool Relation::contains(std::span<const int> tuple) const {
    return std::binary_search(tuples_.begin(), tuples_.end(), tuple,
                              [](std::span<const int> a, std::span<const int> b) {
                                  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                              });
}

bool Relation::same_tuples(const Relation& other) const {
    return arity_ == other.arity_ && domain_size_ == other.domain_size_ && tuples_ == other.tuples_;
}

Relation Relation::renamed(std::string name) const {
    Relation copy = *this;
    copy.name_ = std::move(name);
    return copy;
}

bool operator==(const Relation& a, const Relation& b) {
    return a.name_ == b.name_ && a.same_tuples(b);
}

// --- Operation ----------------------------------------------------------------

Operation::Operation(int arity, int domain_size, std::vector<int> table)
    : arity_(arity), domain_size_(domain_size), table_(std::move(table)) {
    if (arity_ < 1) throw ValidationError("operation arity must be at least 1");
    if (domain_size_ < 2) throw ValidationError("domain size must be at least 2");
    if (table_.size() != checked_power(domain_size_, arity_))
        throw ValidationError("operation table has wrong length");
    for (int v : table_)
        if (v < 0 || v >= domain_size_) throw ValidationError("operation table value out of domain");
}

int Operation::apply(std::span<const int> args) const {
    if (static_cast<int>(args.size()) != arity_)
        throw ValidationError("operation applied to wrong number of arguments");
    return table_[lex_rank(args, domain_size_)];
}

// --- ConstraintLanguage --------------------------------------------------------

ConstraintLanguage::ConstraintLanguage(int domain_size) : domain_size_(domain_size) {
    if (domain_size_ < 2) throw ValidationError("domain size must be at least 2");
}

ConstraintLanguage::ConstraintLanguage(int domain_size, std::vector<Relation> relations)
    : ConstraintLanguage(domain_size) {
    for (Relation& r : relations) add(std::move(r));
}

void ConstraintLanguage::add(Relation relation) {
    if (relation.domain_size() != domain_size_)
        throw ValidationError("relation " + relation.name() + " has a different domain size");
    auto [it, inserted] = relations_.emplace(relation.name(), std::move(relation));
    if (!inserted) throw ValidationError("duplicate relation name " + it->first);
}

bool ConstraintLanguage::has(const std::string& name) const {
    return relations_.find(name) != relations_.end();
}

const Relation& ConstraintLanguage::relation(const std::string& name) const {
    auto it = relations_.find(name);
    if (it == relations_.end()) throw ValidationError("unknown relation " + name);
    return it->second;
}

// --- Instances ------------------------------------------------------------------

std::string to_string(Quantifier q) {
    return q == Quantifier::Forall ? "forall" : "exists";
}

CspInstance::CspInstance(LanguagePtr language,
                         std::vector<std::string> variables,
                         std::vector<Constraint> constraints)
    : language_(std::move(language)), variables_(std::move(variables)), constraints_(std::move(constraints)) {
    if (!language_) throw ValidationError("instance needs a language");
    std::set<std::string> seen;
    for (const std::string& v : variables_) {
        if (v.empty()) throw ValidationError("empty variable name");
        if (!seen.insert(v).second) throw ValidationError("duplicate variable " + v);
    }
    for (const Constraint& c : constraints_) {
        const Relation& r = language_->relation(c.relation);
        if (static_cast<int>(c.vars.size()) != r.arity())
            throw ValidationError("constraint over " + c.relation + " has wrong variable count");
        for (const std::string& v : c.vars)
            if (!seen.count(v)) throw ValidationError("constraint uses undeclared variable " + v);
    }
}

QcspInstance::QcspInstance(CspInstance base, std::vector<std::pair<Quantifier, std::string>> prefix)
    : base_(std::move(base)), prefix_(std::move(prefix)) {
    std::set<std::string> quantified;
    for (const auto& [q, v] : prefix_) {
        (void)q;
        if (!quantified.insert(v).second) throw ValidationError("variable " + v + " quantified twice");
    }
    if (quantified.size() != base_.variables().size())
        throw ValidationError("prefix does not cover the variables exactly once");
    for (const std::string& v : base_.variables())
        if (!quantified.count(v)) throw ValidationError("variable " + v + " missing from prefix");
}

std::vector<std::string> QcspInstance::universal_variables() const {
    std::vector<std::string> out;
    for (const auto& [q, v] : prefix_)
        if (q == Quantifier::Forall) out.push_back(v);
    return out;
}

std::vector<std::string> QcspInstance::existential_variables() const {
    std::vector<std::string> out;
    for (const auto& [q, v] : prefix_)
        if (q == Quantifier::Exists) out.push_back(v);
    return out;
}

// --- evaluation -------------------------------------------------------------------

bool eval_constraint(const Constraint& c, const ConstraintLanguage& lang, const Assignment& a) {
    const Relation& r = lang.relation(c.relation);
    Tuple values;
    values.reserve(c.vars.size());
    for (const std::string& v : c.vars) {
        auto it = a.find(v);
        if (it == a.end()) throw ValidationError("variable " + v + " is unassigned");
        values.push_back(it->second);
    }
    return r.contains(values);
}

bool satisfies_all(const CspInstance& inst, const Assignment& a) {
    for (const Constraint& c : inst.constraints())
        if (!eval_constraint(c, inst.language(), a)) return false;
    return true;
}

Tuple apply_coordinatewise(const Operation& f, const std::vector<Tuple>& ts) {
    if (static_cast<int>(ts.size()) != f.arity())
        throw ValidationError("coordinatewise application needs one tuple per operation argument");
    if (ts.empty()) throw ValidationError("no tuples given");
    const std::size_t k = ts.front().size();
    for (const Tuple& t : ts)
        if (t.size() != k) throw ValidationError("tuples of unequal arity");
    Tuple result(k, 0);
    Tuple column(ts.size(), 0);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < ts.size(); ++i) column[i] = ts[i][j];
        result[j] = f.apply(column);
    }
    return result;
}

// --- file formats -------------------------------------------------------------------

namespace {

struct Line {
    int number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> tokens;
        std::string tok;
        while (ls >> tok) tokens.push_back(tok);
        if (!tokens.empty()) lines.push_back({number, std::move(tokens)});
    }
    return lines;
}

int parse_int(const std::string& tok, const char* what, int line) {
    try {
        std::size_t used = 0;
        int value = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return value;
    } catch (const std::exception&) {
        throw ParseError(std::string("expected ") + what + ", got '" + tok + "'", line);
    }
}

Tuple parse_digit_tuple(const std::string& tok, int arity, int domain_size, int line) {
    if (static_cast<int>(tok.size()) != arity)
        throw ParseError("tuple '" + tok + "' has length " + std::to_string(tok.size()) +
                             ", expected " + std::to_string(arity),
                         line);
    Tuple t;
    t.reserve(tok.size());
    for (char c : tok) {
        if (c < '0' || c > '9') throw ParseError("tuple '" + tok + "' is not a digit string", line);
        int v = c - '0';
        if (v >= domain_size)
            throw ParseError("tuple value " + std::string(1, c) + " out of domain", line);
        t.push_back(v);
    }
    return t;
}

} // namespace

ConstraintLanguage parse_language(const std::string& text) {
    const std::vector<Line> lines = tokenize(text);
    if (lines.empty()) throw ParseError("empty language document");

    std::size_t i = 0;
    if (lines[i].tokens[0] != "domain" || lines[i].tokens.size() != 2)
        throw ParseError("expected 'domain <d>'", lines[i].number);
    const int d = parse_int(lines[i].tokens[1], "domain size", lines[i].number);
    if (d < 2 || d > 10) throw ParseError("domain size must be between 2 and 10", lines[i].number);
    ++i;

    ConstraintLanguage lang(d);
    while (i < lines.size()) {
        const Line& header = lines[i];
        if (header.tokens[0] != "relation" || header.tokens.size() != 3)
            throw ParseError("expected 'relation <name> <arity>'", header.number);
        const std::string name = header.tokens[1];
        const int arity = parse_int(header.tokens[2], "arity", header.number);
        if (arity < 1) throw ParseError("arity must be at least 1", header.number);
        ++i;
        std::vector<Tuple> tuples;
        while (i < lines.size() && lines[i].tokens[0] != "relation") {
            const Line& row = lines[i];
            if (row.tokens.size() != 1)
                throw ParseError("expected one tuple per line", row.number);
            tuples.push_back(parse_digit_tuple(row.tokens[0], arity, d, row.number));
            ++i;
        }
        if (lang.has(name)) throw ParseError("duplicate relation name " + name, header.number);
        lang.add(Relation(name, arity, d, std::move(tuples)));
    }
    return lang;
}

std::string serialize_language(const ConstraintLanguage& lang) {
    if (lang.domain_size() > 10)
        throw ValidationError("digit-string files support domain sizes up to 10");
    std::ostringstream os;
    os << "domain " << lang.domain_size() << "\n";
    for (const auto& [name, rel] : lang.relations()) {
        os << "relation " << name << " " << rel.arity() << "\n";
        for (const Tuple& t : rel.tuples()) {
            for (int v : t) os << static_cast<char>('0' + v);
            os << "\n";
        }
    }
    return os.str();
}

namespace {

struct InstanceParts {
    std::vector<std::string> variables;
    std::vector<Constraint> constraints;
    std::optional<std::vector<std::pair<Quantifier, std::string>>> prefix;
};

InstanceParts parse_instance_parts(const std::string& text, bool allow_prefix) {
    const std::vector<Line> lines = tokenize(text);
    if (lines.empty()) throw ParseError("empty instance document");

    InstanceParts parts;
    if (lines[0].tokens[0] != "vars")
        throw ParseError("expected 'vars <v1> <v2> ...' first", lines[0].number);
    parts.variables.assign(lines[0].tokens.begin() + 1, lines[0].tokens.end());

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const Line& line = lines[i];
        const std::string& head = line.tokens[0];
        if (head == "constraint") {
            if (line.tokens.size() < 3)
                throw ParseError("expected 'constraint <relname> <v...>'", line.number);
            Constraint c;
            c.relation = line.tokens[1];
            c.vars.assign(line.tokens.begin() + 2, line.tokens.end());
            parts.constraints.push_back(std::move(c));
        } else if (head == "prefix") {
            if (!allow_prefix) throw ParseError("prefix line not allowed in a plain instance", line.number);
            if (parts.prefix) throw ParseError("duplicate prefix line", line.number);
            if ((line.tokens.size() - 1) % 2 != 0)
                throw ParseError("prefix expects quantifier/variable pairs", line.number);
            std::vector<std::pair<Quantifier, std::string>> prefix;
            for (std::size_t j = 1; j + 1 < line.tokens.size(); j += 2) {
                const std::string& q = line.tokens[j];
                if (q != "A" && q != "E")
                    throw ParseError("quantifier must be 'A' or 'E', got '" + q + "'", line.number);
                prefix.emplace_back(q == "A" ? Quantifier::Forall : Quantifier::Exists,
                                    line.tokens[j + 1]);
            }
            parts.prefix = std::move(prefix);
        } else {
            throw ParseError("unexpected directive '" + head + "'", line.number);
        }
    }
    return parts;
}

} // namespace

CspInstance parse_csp_instance(const std::string& text, LanguagePtr language) {
    InstanceParts parts = parse_instance_parts(text, false);
    try {
        return CspInstance(std::move(language), std::move(parts.variables), std::move(parts.constraints));
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
}

std::string serialize_csp_instance(const CspInstance& inst) {
    std::ostringstream os;
    os << "vars";
    for (const std::string& v : inst.variables()) os << " " << v;
    os << "\n";
    for (const Constraint& c : inst.constraints()) {
        os << "constraint " << c.relation;
        for (const std::string& v : c.vars) os << " " << v;
        os << "\n";
    }
    return os.str();
}

QcspInstance parse_qcsp_instance(const std::string& text, LanguagePtr language) {
    InstanceParts parts = parse_instance_parts(text, true);
    if (!parts.prefix) throw ParseError("quantified instance needs a prefix line");
    try {
        CspInstance base(std::move(language), std::move(parts.variables), std::move(parts.constraints));
        return QcspInstance(std::move(base), std::move(*parts.prefix));
    } catch (const ValidationError& e) {
        throw ParseError(e.what());
    }
}

std::string serialize_qcsp_instance(const QcspInstance& inst) {
    std::ostringstream os;
    os << "vars";
    for (const std::string& v : inst.base().variables()) os << " " << v;
    os << "\n";
    os << "prefix";
    for (const auto& [q, v] : inst.prefix())
        os << " " << (q == Quantifier::Forall ? "A" : "E") << " " << v;
    os << "\n";
    for (const Constraint& c : inst.base().constraints()) {
        os << "constraint " << c.relation;
        for (const std::string& v : c.vars) os << " " << v;
        os << "\n";
    }
    return os.str();
}

} // namespace polycsp
