#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tot {

// Minimal s-expression reader shared by the formula and type-expression
// front ends. Atoms are bare tokens; strings with spaces are not needed.
struct SExpr {
    bool is_atom = false;
    std::string atom;
    std::vector<SExpr> items;

    static SExpr make_atom(std::string a) {
        SExpr e;
        e.is_atom = true;
        e.atom = std::move(a);
        return e;
    }
    static SExpr make_list(std::vector<SExpr> xs) {
        SExpr e;
        e.items = std::move(xs);
        return e;
    }

    bool is_list() const { return !is_atom; }
    std::size_t size() const { return items.size(); }
    const SExpr& at(std::size_t i) const;
    // head() of a list when the first item is an atom, else "".
    std::string head() const;
};

SExpr parse_sexpr(std::string_view text);
// Parses a whole file as a sequence of top-level s-expressions.
std::vector<SExpr> parse_sexpr_all(std::string_view text);
std::string to_string(const SExpr& e);

} // namespace tot
