#include "tot/sexpr.hpp"

#include <cctype>
#include <stdexcept>

namespace tot {

const SExpr& SExpr::at(std::size_t i) const {
    if (is_atom || i >= items.size())
        throw std::runtime_error("sexpr: index " + std::to_string(i) + " out of range in " + to_string(*this));
    return items[i];
}

std::string SExpr::head() const {
    if (is_atom || items.empty() || !items[0].is_atom) return "";
    return items[0].atom;
}

namespace {

struct Reader {
    std::string_view text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == ';') { // comment to end of line
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error("sexpr parse error at offset " + std::to_string(pos) + ": " + msg);
    }

    SExpr read() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of input");
        char c = text[pos];
        if (c == '(') {
            ++pos;
            std::vector<SExpr> items;
            for (;;) {
                skip_ws();
                if (pos >= text.size()) fail("unterminated list");
                if (text[pos] == ')') {
                    ++pos;
                    return SExpr::make_list(std::move(items));
                }
                items.push_back(read());
            }
        }
        if (c == ')') fail("unexpected ')'");
        std::size_t start = pos;
        while (pos < text.size()) {
            char d = text[pos];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
            ++pos;
        }
        return SExpr::make_atom(std::string(text.substr(start, pos - start)));
    }
};

} // namespace

SExpr parse_sexpr(std::string_view text) {
    Reader r{text};
    SExpr e = r.read();
    r.skip_ws();
    if (r.pos != text.size()) r.fail("trailing input after expression");
    return e;
}

std::vector<SExpr> parse_sexpr_all(std::string_view text) {
    Reader r{text};
    std::vector<SExpr> out;
    for (;;) {
        r.skip_ws();
        if (r.pos >= text.size()) break;
        out.push_back(r.read());
    }
    return out;
}

std::string to_string(const SExpr& e) {
    if (e.is_atom) return e.atom;
    std::string s = "(";
    for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) s += ' ';
        s += to_string(e.items[i]);
    }
    s += ')';
    return s;
}

} // namespace tot
