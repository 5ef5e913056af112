#pragma once

#include "tot/presheaf.hpp"
#include "tot/sexpr.hpp"

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tot::logic {

// Terms of the internal logic: a context variable, or a morphism applied to
// a tuple of terms. The morphism's source must be the product of the
// argument types (a single argument applies directly).
struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    std::string var;                       // nonempty for variables
    std::shared_ptr<const Morphism> fn;    // set for applications
    std::vector<TermPtr> args;
};

TermPtr term_var(std::string name);
TermPtr term_app(Morphism fn, std::vector<TermPtr> args);

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Top {};
struct Bot {};
struct Eq { TermPtr lhs, rhs; };
// Relation atom: `name` refers either to a relation in the RelEnv or to an
// enclosing mu-bound predicate variable.
struct RelAtom { std::string name; std::vector<TermPtr> args; };
struct And { FormulaPtr l, r; };
struct Or { FormulaPtr l, r; };
struct Implies { FormulaPtr l, r; };
struct Exists { std::string var; TruncatedPresheaf over; FormulaPtr body; };
struct Forall { std::string var; TruncatedPresheaf over; FormulaPtr body; };
struct LaterF { FormulaPtr body; };
// Guarded recursive predicate mu r(params). body, applied to args. The body's
// context is exactly the parameter list; r may occur in it only under Later.
struct MuPred {
    std::string name;
    std::vector<std::pair<std::string, TruncatedPresheaf>> params;
    FormulaPtr body;
    std::vector<TermPtr> args;
};

struct Formula {
    std::variant<Top, Bot, Eq, RelAtom, And, Or, Implies, Exists, Forall, LaterF, MuPred> node;
};

FormulaPtr mk_top();
FormulaPtr mk_bot();
FormulaPtr mk_eq(TermPtr a, TermPtr b);
FormulaPtr mk_rel(std::string name, std::vector<TermPtr> args);
FormulaPtr mk_and(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_or(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr mk_not(FormulaPtr a); // a -> Bot
FormulaPtr mk_exists(std::string var, TruncatedPresheaf over, FormulaPtr body);
FormulaPtr mk_forall(std::string var, TruncatedPresheaf over, FormulaPtr body);
FormulaPtr mk_later(FormulaPtr body);
FormulaPtr mk_mu(std::string name, std::vector<std::pair<std::string, TruncatedPresheaf>> params,
                 FormulaPtr body, std::vector<TermPtr> args);

// A forcing context: ordered (variable, object) pairs. An environment at
// level n picks one element index per context entry.
using Context = std::vector<std::pair<std::string, TruncatedPresheaf>>;
using Env = std::vector<int>;

// A named relation: a subobject of the product of its argument objects.
struct Relation {
    std::vector<TruncatedPresheaf> args;
    Subobject sub; // ambient == product_n(args)
};

Relation make_relation(std::vector<TruncatedPresheaf> args, Subobject sub);
Relation relation_of_subobject(const Subobject& s); // unary
using RelEnv = std::map<std::string, Relation>;

// Checks scoping, matching depths, and mu guardedness; throws on violation.
void validate_formula(const Formula& f, const Context& ctx, const RelEnv& rels);

// Kripke-Joyal forcing at `level` (1-based). The environment must assign an
// element of each context object's level set.
bool force(int level, const Formula& f, const Context& ctx, const Env& env, const RelEnv& rels = {});

// Tabulates force over all levels and environments into a subobject of the
// product of the context objects. `parallel` toggles the OpenMP path;
// denote_serial is the reference implementation used by the tests.
Subobject denote(const Formula& f, const Context& ctx, const RelEnv& rels = {},
                 std::size_t cap = default_enum_cap, bool parallel = true);
Subobject denote_serial(const Formula& f, const Context& ctx, const RelEnv& rels = {},
                        std::size_t cap = default_enum_cap);

// Solves mu r(params). body levelwise: level k of the solution depends on
// levels < k only, through Later. Requires guardedness.
Relation solve_mu_pred(const MuPred& mu, const RelEnv& rels = {}, std::size_t cap = default_enum_cap);

// Forcing of Contr(f) := forall x x'. Later(x = x') -> f(x) = f(x') at the
// top level.
bool is_contr_internal(const Morphism& f, std::size_t cap = default_enum_cap);

// Internal Banach fixed point: for internally contractive f : X -> X on an
// inhabited X, iterating f depth times from any global element lands on the
// unique fixed point.
GlobalElement banach_fix(const Morphism& f, std::size_t cap = default_enum_cap);

// --- s-expression front end -------------------------------------------------

// A query file binds objects, relations and variables and gives one formula:
//   (query (depth 3)
//          (object X (const a b))
//          (rel R (X X) ((a b)))
//          (var x X)
//          (formula (implies (later (eq x x)) (eq x x))))
// Object expressions: (const l1 l2 ...) | (const N) | (omega) | (terminal) |
// (initial) | (later E) | (prod E E) | (sum E E) | (arrow E E).
// Relations are constant (the same tuples at every level, closure checked) or
// per level: (rel R (X) (levels ((a) (a b)))).
// Formulas: (top) (bot) (eq t t) (rel R t...) (and f f) (or f f)
// (implies f f) (not f) (exists x X f) (forall x X f) (later f)
// (mu R ((x X) (y X)) f t...).
struct Query {
    int depth = 0;
    std::map<std::string, TruncatedPresheaf> objects;
    RelEnv rels;
    Context ctx;
    FormulaPtr formula;
};

Query parse_query(const SExpr& e, int default_depth);
TruncatedPresheaf parse_object_expr(const SExpr& e, int depth,
                                    const std::map<std::string, TruncatedPresheaf>& named);

} // namespace tot::logic
