#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tot {

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when an enumeration would exceed the candidate cap. Never a silent
// truncation: callers either get the full result or this.
struct cap_exceeded : error {
    explicit cap_exceeded(const std::string& msg) : error(msg) {}
};

inline constexpr std::size_t default_enum_cap = 1'000'000;

// A depth-truncated object of the presheaf category over the ordered
// naturals: finite sets X(1),...,X(n) with restriction maps
// r_k : X(k+1) -> X(k). Level k is stored at 0-based index k-1; elements are
// opaque labels, addressed by index within their level. Immutable after
// construction.
struct TruncatedPresheaf {
    int depth = 0;
    std::vector<std::vector<std::string>> levels;
    // restr[k][i] = index in levels[k] of the restriction of levels[k+1][i].
    std::vector<std::vector<int>> restr;

    int size(int level) const { return static_cast<int>(levels[level].size()); }
    const std::string& label(int level, int idx) const { return levels[level][idx]; }
    // Index of `lab` in `level`, or -1.
    int find(int level, const std::string& lab) const;
    // x|_to : restriction of element `idx` at 0-based level `from` down to `to`.
    int restrict_elem(int from, int to, int idx) const;

    bool operator==(const TruncatedPresheaf&) const = default;
};

// Validates all invariants (label uniqueness, total restrictions, depth >= 1)
// and returns the presheaf; every constructor below goes through this.
TruncatedPresheaf make_presheaf(int depth, std::vector<std::vector<std::string>> levels,
                                std::vector<std::vector<int>> restr);

// A natural transformation between presheaves of equal depth.
// comp[k][i] = index in target level k of the image of source element i.
struct Morphism {
    TruncatedPresheaf source, target;
    std::vector<std::vector<int>> comp;

    int apply(int level, int idx) const { return comp[level][idx]; }
    bool operator==(const Morphism&) const = default;
};

// Validates naturality: f_k . r^X_k = r^Y_k . f_{k+1}.
Morphism make_morphism(TruncatedPresheaf source, TruncatedPresheaf target,
                       std::vector<std::vector<int>> comp);

// A subobject: level subsets closed under restriction.
struct Subobject {
    TruncatedPresheaf ambient;
    std::vector<std::vector<char>> mem; // mem[k][i] != 0 iff element i at level k is in

    bool contains(int level, int idx) const { return mem[level][idx] != 0; }
    bool operator==(const Subobject&) const = default;
};

Subobject make_subobject(TruncatedPresheaf ambient, std::vector<std::vector<char>> mem);
Subobject full_subobject(const TruncatedPresheaf& x);
Subobject empty_subobject(const TruncatedPresheaf& x);
bool subobject_leq(const Subobject& a, const Subobject& b);

// A morphism 1 -> X in concrete form: one element per level, compatible
// under restriction.
struct GlobalElement {
    TruncatedPresheaf target;
    std::vector<int> picks;

    bool operator==(const GlobalElement&) const = default;
};

GlobalElement make_global_element(TruncatedPresheaf target, std::vector<int> picks);

// --- basic objects -------------------------------------------------------

// Constant presheaf: X(k) = elems at every level, identity restrictions.
TruncatedPresheaf constant(int depth, const std::vector<std::string>& elems);
TruncatedPresheaf terminal(int depth);
TruncatedPresheaf initial(int depth);
// Subobject classifier truncation: Omega(k) = {0,...,k}, r_k(x) = min(k, x).
// Labels are the decimal numerals, so label index == truth value.
TruncatedPresheaf omega(int depth);

// --- limits and colimits (pointwise) -------------------------------------

// n-ary product with canonical labels "(a,b,...)" and row-major index layout
// (last factor varies fastest). product(x, y) == product_n({x, y}).
TruncatedPresheaf product_n(const std::vector<TruncatedPresheaf>& xs);
TruncatedPresheaf product(const TruncatedPresheaf& x, const TruncatedPresheaf& y);
TruncatedPresheaf coproduct(const TruncatedPresheaf& x, const TruncatedPresheaf& y);

// Row-major tuple <-> index conversions for product_n results.
int product_index(const std::vector<TruncatedPresheaf>& xs, int level, const std::vector<int>& tuple);
std::vector<int> product_tuple(const std::vector<TruncatedPresheaf>& xs, int level, int idx);

// Pairing and projections for binary products.
Morphism proj1(const TruncatedPresheaf& x, const TruncatedPresheaf& y);
Morphism proj2(const TruncatedPresheaf& x, const TruncatedPresheaf& y);
Morphism pair_mor(const Morphism& f, const Morphism& g); // <f,g> : Z -> X x Y
Morphism coprod_inl(const TruncatedPresheaf& x, const TruncatedPresheaf& y);
Morphism coprod_inr(const TruncatedPresheaf& x, const TruncatedPresheaf& y);

// --- exponentials ---------------------------------------------------------

// (Y^X)(k) is the set of tuples (f_1,...,f_k) of maps f_i : X(i) -> Y(i)
// commuting with restrictions; the restriction drops the last component.
// Alongside the object we keep lookup tables so tuples can be applied and
// decoded without parsing labels.
struct Exponential {
    TruncatedPresheaf source, target; // X and Y
    TruncatedPresheaf object;         // Y^X
    // top[k][e] = image vector of the level-(k+1) component of tuple e.
    std::vector<std::vector<std::vector<int>>> top;
    // prev[k][e] = index of the restricted tuple at level k-1 (k >= 1).
    std::vector<std::vector<int>> prev;

    // Applies component f_{j+1} (0-based level j <= k) of tuple e at level k.
    int apply(int k, int e, int j, int x) const;
    // Finds the tuple whose components are the given image vectors, or -1.
    int find_tuple(int k, const std::vector<std::vector<int>>& components) const;
    // Image vectors (f_1..f_{k+1}) of tuple e at level k.
    std::vector<std::vector<int>> components(int k, int e) const;
};

Exponential exponential_full(const TruncatedPresheaf& x, const TruncatedPresheaf& y,
                             std::size_t cap = default_enum_cap, bool parallel = true);
TruncatedPresheaf exponential(const TruncatedPresheaf& x, const TruncatedPresheaf& y,
                              std::size_t cap = default_enum_cap);

// comp : Z^Y x Y^X -> Z^X, composition on exponentials.
Morphism composition_mor(const TruncatedPresheaf& x, const TruncatedPresheaf& y,
                         const TruncatedPresheaf& z, std::size_t cap = default_enum_cap);

// --- the later modality ---------------------------------------------------

// Later shifts one level up and inserts a singleton {*} at level 1.
TruncatedPresheaf later_obj(const TruncatedPresheaf& x);
Morphism later_mor(const Morphism& f);
// next_X : X -> Later X; first component is the map into {*}, (k+1)-th is r_k.
Morphism next_mor(const TruncatedPresheaf& x);
// Earlier (the left adjoint) shifts down; requires depth >= 2.
TruncatedPresheaf earlier_obj(const TruncatedPresheaf& x);
// The adjunction bijection Hom(Earlier X, Y) <-> Hom(X, Later Y).
// X must be passed explicitly in the forward direction since Earlier X does
// not determine it.
Morphism transpose_to_later(const Morphism& f, const TruncatedPresheaf& x); // f : Earlier X -> Y
Morphism transpose_from_later(const Morphism& g);                           // g : X -> Later Y
// J : Later(X -> Y) -> (Later X -> Later Y), the canonical map.
Morphism later_app(const TruncatedPresheaf& x, const TruncatedPresheaf& y,
                   std::size_t cap = default_enum_cap);

// succ : Later Omega -> Omega, k |-> k+1; witnesses contractiveness of the
// later modality on Omega.
Morphism succ_omega(int depth);
// The later modality on Omega itself: x in Omega(m) |-> min(m, x+1).
Morphism later_omega(int depth);

// --- characteristic maps --------------------------------------------------

// chi_A(x at level n) = max{ m <= n : x|_m in A(m) }, or 0.
Morphism char_of_sub(const Subobject& a);
Subobject sub_of_char(const Morphism& m);

// Later on predicates: (Later A)(1) = X(1), (Later A)(n+1) = { x : x|_n in A(n) }.
Subobject later_pred(const Subobject& a);

// --- contractiveness and fixed points -------------------------------------

// Searches for g : Later X -> Y with f = g . next_X. Absence of a witness is
// a normal result. When X(1) is empty, g_1(*) is chosen among Y(1) so that
// the higher levels stay compatible; if Y(1) is empty too there is no g.
std::optional<Morphism> is_contractive_ext(const Morphism& f);

// Unique fixed point of g . next for g : Later X -> X, built levelwise:
// x_1 = g_1(*), x_{n+1} = g_{n+1}(x_n).
GlobalElement fix_point(const Morphism& g);

// --- brute-force enumeration oracles ---------------------------------------

std::vector<GlobalElement> global_elements(const TruncatedPresheaf& x,
                                           std::size_t cap = default_enum_cap);
std::vector<Morphism> hom_set(const TruncatedPresheaf& x, const TruncatedPresheaf& y,
                              std::size_t cap = default_enum_cap);

// All restriction maps surjective.
bool is_total(const TruncatedPresheaf& x);

// --- morphism algebra ------------------------------------------------------

Morphism identity_mor(const TruncatedPresheaf& x);
Morphism compose(const Morphism& g, const Morphism& f); // g . f
GlobalElement apply_global(const Morphism& f, const GlobalElement& x);
Morphism constant_mor(const TruncatedPresheaf& source, const GlobalElement& value);

// Largest k such that f_1..f_k are bijections (0 if f_1 is not).
int n_iso_rank(const Morphism& f);

// Levelwise bijection search constrained by the restriction maps.
std::optional<Morphism> find_iso(const TruncatedPresheaf& x, const TruncatedPresheaf& y);
inline bool isomorphic(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    return find_iso(x, y).has_value();
}

} // namespace tot
