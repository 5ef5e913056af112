#include "tot/presheaf.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tot {

int TruncatedPresheaf::find(int level, const std::string& lab) const {
    const auto& lv = levels[level];
    for (int i = 0; i < static_cast<int>(lv.size()); ++i)
        if (lv[i] == lab) return i;
    return -1;
}

int TruncatedPresheaf::restrict_elem(int from, int to, int idx) const {
    for (int k = from; k > to; --k) idx = restr[k - 1][idx];
    return idx;
}

TruncatedPresheaf make_presheaf(int depth, std::vector<std::vector<std::string>> levels,
                                std::vector<std::vector<int>> restr) {
    if (depth < 1) throw error("presheaf: depth must be >= 1, got " + std::to_string(depth));
    if (static_cast<int>(levels.size()) != depth)
        throw error("presheaf: expected " + std::to_string(depth) + " levels");
    if (static_cast<int>(restr.size()) != depth - 1)
        throw error("presheaf: expected " + std::to_string(depth - 1) + " restriction maps");
    for (int k = 0; k < depth; ++k) {
        std::unordered_set<std::string> seen;
        for (const auto& lab : levels[k])
            if (!seen.insert(lab).second)
                throw error("presheaf: duplicate label '" + lab + "' at level " + std::to_string(k + 1));
    }
    for (int k = 0; k + 1 < depth; ++k) {
        if (restr[k].size() != levels[k + 1].size())
            throw error("presheaf: restriction map " + std::to_string(k + 1) + " is not total");
        for (int i : restr[k])
            if (i < 0 || i >= static_cast<int>(levels[k].size()))
                throw error("presheaf: restriction image out of range at level " + std::to_string(k + 2));
    }
    TruncatedPresheaf x;
    x.depth = depth;
    x.levels = std::move(levels);
    x.restr = std::move(restr);
    return x;
}

Morphism make_morphism(TruncatedPresheaf source, TruncatedPresheaf target,
                       std::vector<std::vector<int>> comp) {
    if (source.depth != target.depth)
        throw error("morphism: source and target depth mismatch");
    const int n = source.depth;
    if (static_cast<int>(comp.size()) != n)
        throw error("morphism: expected " + std::to_string(n) + " components");
    for (int k = 0; k < n; ++k) {
        if (comp[k].size() != source.levels[k].size())
            throw error("morphism: component " + std::to_string(k + 1) + " is not total");
        for (int i : comp[k])
            if (i < 0 || i >= target.size(k))
                throw error("morphism: component image out of range at level " + std::to_string(k + 1));
    }
    for (int k = 0; k + 1 < n; ++k)
        for (int i = 0; i < source.size(k + 1); ++i)
            if (comp[k][source.restr[k][i]] != target.restr[k][comp[k + 1][i]])
                throw error("morphism: naturality fails at level " + std::to_string(k + 2) +
                            " on element '" + source.label(k + 1, i) + "'");
    Morphism f;
    f.source = std::move(source);
    f.target = std::move(target);
    f.comp = std::move(comp);
    return f;
}

Subobject make_subobject(TruncatedPresheaf ambient, std::vector<std::vector<char>> mem) {
    const int n = ambient.depth;
    if (static_cast<int>(mem.size()) != n) throw error("subobject: wrong number of levels");
    for (int k = 0; k < n; ++k)
        if (mem[k].size() != ambient.levels[k].size())
            throw error("subobject: level " + std::to_string(k + 1) + " size mismatch");
    for (int k = 0; k + 1 < n; ++k)
        for (int i = 0; i < ambient.size(k + 1); ++i)
            if (mem[k + 1][i] && !mem[k][ambient.restr[k][i]])
                throw error("subobject: not closed under restriction at level " + std::to_string(k + 2));
    Subobject s;
    s.ambient = std::move(ambient);
    s.mem = std::move(mem);
    return s;
}

Subobject full_subobject(const TruncatedPresheaf& x) {
    std::vector<std::vector<char>> mem(x.depth);
    for (int k = 0; k < x.depth; ++k) mem[k].assign(x.levels[k].size(), 1);
    return make_subobject(x, std::move(mem));
}

Subobject empty_subobject(const TruncatedPresheaf& x) {
    std::vector<std::vector<char>> mem(x.depth);
    for (int k = 0; k < x.depth; ++k) mem[k].assign(x.levels[k].size(), 0);
    return make_subobject(x, std::move(mem));
}

bool subobject_leq(const Subobject& a, const Subobject& b) {
    if (a.ambient != b.ambient) throw error("subobject_leq: different ambient objects");
    for (int k = 0; k < a.ambient.depth; ++k)
        for (std::size_t i = 0; i < a.mem[k].size(); ++i)
            if (a.mem[k][i] && !b.mem[k][i]) return false;
    return true;
}

GlobalElement make_global_element(TruncatedPresheaf target, std::vector<int> picks) {
    const int n = target.depth;
    if (static_cast<int>(picks.size()) != n) throw error("global element: wrong number of picks");
    for (int k = 0; k < n; ++k)
        if (picks[k] < 0 || picks[k] >= target.size(k))
            throw error("global element: pick out of range at level " + std::to_string(k + 1));
    for (int k = 0; k + 1 < n; ++k)
        if (target.restr[k][picks[k + 1]] != picks[k])
            throw error("global element: picks not compatible at level " + std::to_string(k + 2));
    GlobalElement g;
    g.target = std::move(target);
    g.picks = std::move(picks);
    return g;
}

// --- basic objects ---------------------------------------------------------

TruncatedPresheaf constant(int depth, const std::vector<std::string>& elems) {
    if (depth < 1) throw error("constant: depth must be >= 1");
    std::vector<std::vector<std::string>> levels(depth, elems);
    std::vector<std::vector<int>> restr(depth - 1);
    for (int k = 0; k + 1 < depth; ++k) {
        restr[k].resize(elems.size());
        std::iota(restr[k].begin(), restr[k].end(), 0);
    }
    return make_presheaf(depth, std::move(levels), std::move(restr));
}

TruncatedPresheaf terminal(int depth) { return constant(depth, {"u"}); }
TruncatedPresheaf initial(int depth) { return constant(depth, {}); }

TruncatedPresheaf omega(int depth) {
    if (depth < 1) throw error("omega: depth must be >= 1");
    std::vector<std::vector<std::string>> levels(depth);
    std::vector<std::vector<int>> restr(depth - 1);
    for (int k = 0; k < depth; ++k)
        for (int v = 0; v <= k + 1; ++v) levels[k].push_back(std::to_string(v));
    for (int k = 0; k + 1 < depth; ++k) {
        restr[k].resize(k + 3);
        for (int v = 0; v <= k + 2; ++v) restr[k][v] = std::min(k + 1, v);
    }
    return make_presheaf(depth, std::move(levels), std::move(restr));
}

// --- products and coproducts -----------------------------------------------

int product_index(const std::vector<TruncatedPresheaf>& xs, int level, const std::vector<int>& tuple) {
    int idx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) idx = idx * xs[i].size(level) + tuple[i];
    return idx;
}

std::vector<int> product_tuple(const std::vector<TruncatedPresheaf>& xs, int level, int idx) {
    std::vector<int> tuple(xs.size());
    for (std::size_t i = xs.size(); i-- > 0;) {
        int s = xs[i].size(level);
        tuple[i] = idx % s;
        idx /= s;
    }
    return tuple;
}

TruncatedPresheaf product_n(const std::vector<TruncatedPresheaf>& xs) {
    if (xs.empty()) throw error("product_n: empty factor list");
    if (xs.size() == 1) return xs[0];
    const int n = xs[0].depth;
    for (const auto& x : xs)
        if (x.depth != n) throw error("product: depth mismatch");
    std::vector<std::vector<std::string>> levels(n);
    std::vector<std::vector<int>> restr(n - 1);
    for (int k = 0; k < n; ++k) {
        long long total = 1;
        for (const auto& x : xs) total *= x.size(k);
        levels[k].reserve(static_cast<std::size_t>(total));
        for (int idx = 0; idx < total; ++idx) {
            auto tuple = product_tuple(xs, k, idx);
            std::string lab = "(";
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (i) lab += ',';
                lab += xs[i].label(k, tuple[i]);
            }
            lab += ')';
            levels[k].push_back(std::move(lab));
        }
    }
    for (int k = 0; k + 1 < n; ++k) {
        int upper = static_cast<int>(levels[k + 1].size());
        restr[k].resize(upper);
        for (int idx = 0; idx < upper; ++idx) {
            auto tuple = product_tuple(xs, k + 1, idx);
            for (std::size_t i = 0; i < xs.size(); ++i) tuple[i] = xs[i].restr[k][tuple[i]];
            restr[k][idx] = product_index(xs, k, tuple);
        }
    }
    return make_presheaf(n, std::move(levels), std::move(restr));
}

TruncatedPresheaf product(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    return product_n({x, y});
}

TruncatedPresheaf coproduct(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    if (x.depth != y.depth) throw error("coproduct: depth mismatch");
    const int n = x.depth;
    std::vector<std::vector<std::string>> levels(n);
    std::vector<std::vector<int>> restr(n - 1);
    for (int k = 0; k < n; ++k) {
        for (const auto& lab : x.levels[k]) levels[k].push_back("inl(" + lab + ")");
        for (const auto& lab : y.levels[k]) levels[k].push_back("inr(" + lab + ")");
    }
    for (int k = 0; k + 1 < n; ++k) {
        for (int i = 0; i < x.size(k + 1); ++i) restr[k].push_back(x.restr[k][i]);
        for (int i = 0; i < y.size(k + 1); ++i) restr[k].push_back(x.size(k) + y.restr[k][i]);
    }
    return make_presheaf(n, std::move(levels), std::move(restr));
}

Morphism proj1(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    auto p = product(x, y);
    std::vector<std::vector<int>> comp(p.depth);
    for (int k = 0; k < p.depth; ++k) {
        comp[k].resize(p.size(k));
        for (int idx = 0; idx < p.size(k); ++idx) comp[k][idx] = product_tuple({x, y}, k, idx)[0];
    }
    return make_morphism(p, x, std::move(comp));
}

Morphism proj2(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    auto p = product(x, y);
    std::vector<std::vector<int>> comp(p.depth);
    for (int k = 0; k < p.depth; ++k) {
        comp[k].resize(p.size(k));
        for (int idx = 0; idx < p.size(k); ++idx) comp[k][idx] = product_tuple({x, y}, k, idx)[1];
    }
    return make_morphism(p, y, std::move(comp));
}

Morphism pair_mor(const Morphism& f, const Morphism& g) {
    if (f.source != g.source) throw error("pair_mor: different sources");
    auto p = product(f.target, g.target);
    std::vector<std::vector<int>> comp(p.depth);
    for (int k = 0; k < p.depth; ++k) {
        comp[k].resize(f.source.size(k));
        for (int i = 0; i < f.source.size(k); ++i)
            comp[k][i] = product_index({f.target, g.target}, k, {f.comp[k][i], g.comp[k][i]});
    }
    return make_morphism(f.source, p, std::move(comp));
}

Morphism coprod_inl(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    auto c = coproduct(x, y);
    std::vector<std::vector<int>> comp(x.depth);
    for (int k = 0; k < x.depth; ++k) {
        comp[k].resize(x.size(k));
        std::iota(comp[k].begin(), comp[k].end(), 0);
    }
    return make_morphism(x, c, std::move(comp));
}

Morphism coprod_inr(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    auto c = coproduct(x, y);
    std::vector<std::vector<int>> comp(y.depth);
    for (int k = 0; k < y.depth; ++k) {
        comp[k].resize(y.size(k));
        for (int i = 0; i < y.size(k); ++i) comp[k][i] = x.size(k) + i;
    }
    return make_morphism(y, c, std::move(comp));
}

// --- exponentials ----------------------------------------------------------

namespace {

std::string encode_fun(const std::vector<int>& images) {
    std::string s = "(";
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(images[i]);
    }
    s += ')';
    return s;
}

std::string extend_tuple_label(const std::string& prev_label, const std::vector<int>& images) {
    if (prev_label.empty()) return "[" + encode_fun(images) + "]";
    std::string s = prev_label;
    s.pop_back(); // drop ']'
    s += ';';
    s += encode_fun(images);
    s += ']';
    return s;
}

// All image vectors f : X(level) -> Y(level) such that
// r^Y(f(x)) == below[r^X(x)] (no constraint when below is null).
void enumerate_compatible(const TruncatedPresheaf& x, const TruncatedPresheaf& y, int level,
                          const std::vector<int>* below, std::size_t cap,
                          std::vector<std::vector<int>>& out) {
    const int dom = x.size(level);
    const int cod = y.size(level);
    std::vector<std::vector<int>> choices(dom);
    for (int i = 0; i < dom; ++i) {
        for (int j = 0; j < cod; ++j) {
            if (below) {
                int want = (*below)[x.restr[level - 1][i]];
                if (y.restr[level - 1][j] != want) continue;
            }
            choices[i].push_back(j);
        }
        if (choices[i].empty()) return; // no compatible function
    }
    double count = 1;
    for (int i = 0; i < dom; ++i) {
        count *= static_cast<double>(choices[i].size());
        if (count > static_cast<double>(cap))
            throw cap_exceeded("exponential: candidate count exceeds cap at level " + std::to_string(level + 1));
    }
    std::vector<int> cur(dom, 0);
    std::vector<int> images(dom);
    for (;;) {
        for (int i = 0; i < dom; ++i) images[i] = choices[i][cur[i]];
        out.push_back(images);
        int i = dom - 1;
        while (i >= 0 && ++cur[i] == static_cast<int>(choices[i].size())) cur[i--] = 0;
        if (i < 0) break;
    }
}

} // namespace

Exponential exponential_full(const TruncatedPresheaf& x, const TruncatedPresheaf& y,
                             std::size_t cap, bool parallel) {
    if (x.depth != y.depth) throw error("exponential: depth mismatch");
    const int n = x.depth;
    Exponential e;
    e.source = x;
    e.target = y;
    e.top.resize(n);
    e.prev.resize(n);

    std::vector<std::vector<std::string>> levels(n);
    std::vector<std::vector<int>> restr(n - 1);

    // level 1: all functions X(1) -> Y(1)
    std::vector<std::vector<int>> base;
    enumerate_compatible(x, y, 0, nullptr, cap, base);
    for (const auto& images : base) {
        levels[0].push_back(extend_tuple_label("", images));
        e.top[0].push_back(images);
    }

    for (int k = 1; k < n; ++k) {
        const int prev_count = static_cast<int>(levels[k - 1].size());
        std::vector<std::vector<std::vector<int>>> buckets(prev_count);
        bool overflow = false;
        std::string overflow_msg;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
        for (int t = 0; t < prev_count; ++t) {
            if (overflow) continue;
            try {
                enumerate_compatible(x, y, k, &e.top[k - 1][t], cap, buckets[t]);
            } catch (const cap_exceeded& ex) {
#ifdef _OPENMP
#pragma omp critical
#endif
                {
                    overflow = true;
                    overflow_msg = ex.what();
                }
            }
        }
        if (overflow) throw cap_exceeded(overflow_msg);
        std::size_t total = 0;
        for (const auto& b : buckets) total += b.size();
        if (total > cap) throw cap_exceeded("exponential: level size exceeds cap at level " + std::to_string(k + 1));
        levels[k].reserve(total);
        for (int t = 0; t < prev_count; ++t) {
            for (const auto& images : buckets[t]) {
                levels[k].push_back(extend_tuple_label(levels[k - 1][t], images));
                e.top[k].push_back(images);
                e.prev[k].push_back(t);
                restr[k - 1].push_back(t);
            }
        }
    }
    e.object = make_presheaf(n, std::move(levels), std::move(restr));
    return e;
}

TruncatedPresheaf exponential(const TruncatedPresheaf& x, const TruncatedPresheaf& y, std::size_t cap) {
    return exponential_full(x, y, cap).object;
}

int Exponential::apply(int k, int e, int j, int xidx) const {
    int cur = e;
    for (int lvl = k; lvl > j; --lvl) cur = prev[lvl][cur];
    return top[j][cur][xidx];
}

std::vector<std::vector<int>> Exponential::components(int k, int e) const {
    std::vector<std::vector<int>> out(k + 1);
    int cur = e;
    for (int lvl = k; lvl >= 0; --lvl) {
        out[lvl] = top[lvl][cur];
        if (lvl > 0) cur = prev[lvl][cur];
    }
    return out;
}

int Exponential::find_tuple(int k, const std::vector<std::vector<int>>& comps) const {
    for (int e = 0; e < static_cast<int>(top[k].size()); ++e)
        if (components(k, e) == comps) return e;
    return -1;
}

Morphism composition_mor(const TruncatedPresheaf& x, const TruncatedPresheaf& y,
                         const TruncatedPresheaf& z, std::size_t cap) {
    auto yx = exponential_full(x, y, cap);
    auto zy = exponential_full(y, z, cap);
    auto zx = exponential_full(x, z, cap);
    auto src = product(zy.object, yx.object);
    std::vector<std::vector<int>> comp(x.depth);
    for (int k = 0; k < x.depth; ++k) {
        comp[k].resize(src.size(k));
        for (int idx = 0; idx < src.size(k); ++idx) {
            auto pr = product_tuple({zy.object, yx.object}, k, idx);
            std::vector<std::vector<int>> comps(k + 1);
            for (int j = 0; j <= k; ++j) {
                comps[j].resize(x.size(j));
                for (int xi = 0; xi < x.size(j); ++xi)
                    comps[j][xi] = zy.apply(k, pr[0], j, yx.apply(k, pr[1], j, xi));
            }
            int t = zx.find_tuple(k, comps);
            if (t < 0) throw error("composition_mor: composite tuple not found");
            comp[k][idx] = t;
        }
    }
    return make_morphism(src, zx.object, std::move(comp));
}

// --- later -----------------------------------------------------------------

TruncatedPresheaf later_obj(const TruncatedPresheaf& x) {
    const int n = x.depth;
    std::vector<std::vector<std::string>> levels(n);
    std::vector<std::vector<int>> restr(n - 1);
    levels[0] = {"*"};
    for (int k = 1; k < n; ++k) levels[k] = x.levels[k - 1];
    if (n >= 2) restr[0].assign(x.levels[0].size(), 0);
    for (int k = 2; k < n; ++k) restr[k - 1] = x.restr[k - 2];
    return make_presheaf(n, std::move(levels), std::move(restr));
}

Morphism later_mor(const Morphism& f) {
    auto src = later_obj(f.source);
    auto tgt = later_obj(f.target);
    std::vector<std::vector<int>> comp(src.depth);
    comp[0] = {0};
    for (int k = 1; k < src.depth; ++k) comp[k] = f.comp[k - 1];
    return make_morphism(src, tgt, std::move(comp));
}

Morphism next_mor(const TruncatedPresheaf& x) {
    auto tgt = later_obj(x);
    std::vector<std::vector<int>> comp(x.depth);
    comp[0].assign(x.levels[0].size(), 0);
    for (int k = 1; k < x.depth; ++k) comp[k] = x.restr[k - 1];
    return make_morphism(x, tgt, std::move(comp));
}

TruncatedPresheaf earlier_obj(const TruncatedPresheaf& x) {
    if (x.depth < 2) throw error("earlier_obj: depth must be >= 2");
    std::vector<std::vector<std::string>> levels(x.levels.begin() + 1, x.levels.end());
    std::vector<std::vector<int>> restr(x.restr.begin() + 1, x.restr.end());
    return make_presheaf(x.depth - 1, std::move(levels), std::move(restr));
}

Morphism transpose_to_later(const Morphism& f, const TruncatedPresheaf& x) {
    if (f.source != earlier_obj(x)) throw error("transpose_to_later: source is not Earlier of the given object");
    // Target is Later Y at depth n, built from Y's n-1 levels: {*}, Y(1..n-1).
    const int n = x.depth;
    std::vector<std::vector<std::string>> levels(n);
    std::vector<std::vector<int>> restr(n - 1);
    levels[0] = {"*"};
    for (int k = 1; k < n; ++k) levels[k] = f.target.levels[k - 1];
    if (n >= 2) restr[0].assign(levels[1].size(), 0);
    for (int k = 2; k < n; ++k) restr[k - 1] = f.target.restr[k - 2];
    auto target = make_presheaf(n, std::move(levels), std::move(restr));
    std::vector<std::vector<int>> comp(n);
    comp[0].assign(x.size(0), 0);
    for (int k = 1; k < n; ++k) comp[k] = f.comp[k - 1];
    return make_morphism(x, target, std::move(comp));
}

Morphism transpose_from_later(const Morphism& g) {
    // g : X -> Later Y  |->  f : Earlier X -> Y, with f_k = g_{k+1}; the
    // levels of Later Y at 2..n are exactly Y(1..n-1), so indices align.
    std::vector<std::vector<int>> comp(g.comp.begin() + 1, g.comp.end());
    return make_morphism(earlier_obj(g.source), earlier_obj(g.target), std::move(comp));
}

Morphism later_app(const TruncatedPresheaf& x, const TruncatedPresheaf& y, std::size_t cap) {
    if (x.depth != y.depth) throw error("later_app: depth mismatch");
    auto inner = exponential_full(x, y, cap);
    auto src = later_obj(inner.object);
    auto outer = exponential_full(later_obj(x), later_obj(y), cap);
    std::vector<std::vector<int>> comp(src.depth);
    // level 1: the unique map {*} -> {*} is the only tuple of the outer
    // exponential at level 1.
    if (outer.object.size(0) != 1) throw error("later_app: expected singleton function space at level 1");
    comp[0].assign(src.size(0), 0);
    for (int k = 1; k < src.depth; ++k) {
        comp[k].resize(src.size(k));
        for (int e = 0; e < src.size(k); ++e) {
            // src level k+1 holds tuples of the inner exponential at level k.
            auto inner_comps = inner.components(k - 1, e);
            std::vector<std::vector<int>> shifted(k + 1);
            shifted[0] = {0}; // {*} -> {*}
            for (int j = 1; j <= k; ++j) shifted[j] = inner_comps[j - 1];
            int t = outer.find_tuple(k, shifted);
            if (t < 0) throw error("later_app: shifted tuple not found");
            comp[k][e] = t;
        }
    }
    return make_morphism(src, outer.object, std::move(comp));
}

Morphism succ_omega(int depth) {
    auto om = omega(depth);
    auto src = later_obj(om);
    std::vector<std::vector<int>> comp(depth);
    comp[0] = {1}; // * |-> 1 in Omega(1) = {0,1}
    for (int k = 1; k < depth; ++k) {
        comp[k].resize(src.size(k));
        for (int v = 0; v < src.size(k); ++v) comp[k][v] = v + 1;
    }
    return make_morphism(src, om, std::move(comp));
}

Morphism later_omega(int depth) {
    return compose(succ_omega(depth), next_mor(omega(depth)));
}

// --- characteristic maps ----------------------------------------------------

Morphism char_of_sub(const Subobject& a) {
    const auto& x = a.ambient;
    auto om = omega(x.depth);
    std::vector<std::vector<int>> comp(x.depth);
    for (int k = 0; k < x.depth; ++k) {
        comp[k].resize(x.size(k));
        for (int i = 0; i < x.size(k); ++i) {
            int best = 0;
            for (int m = k; m >= 0; --m) {
                if (a.contains(m, x.restrict_elem(k, m, i))) {
                    best = m + 1;
                    break;
                }
            }
            comp[k][i] = best; // Omega labels are numerals, index == value
        }
    }
    return make_morphism(x, om, std::move(comp));
}

Subobject sub_of_char(const Morphism& m) {
    if (m.target != omega(m.target.depth)) throw error("sub_of_char: target is not omega");
    std::vector<std::vector<char>> mem(m.source.depth);
    for (int k = 0; k < m.source.depth; ++k) {
        mem[k].resize(m.source.size(k));
        for (int i = 0; i < m.source.size(k); ++i) mem[k][i] = (m.comp[k][i] == k + 1) ? 1 : 0;
    }
    return make_subobject(m.source, std::move(mem));
}

Subobject later_pred(const Subobject& a) {
    const auto& x = a.ambient;
    std::vector<std::vector<char>> mem(x.depth);
    mem[0].assign(x.levels[0].size(), 1);
    for (int k = 1; k < x.depth; ++k) {
        mem[k].resize(x.size(k));
        for (int i = 0; i < x.size(k); ++i) mem[k][i] = a.contains(k - 1, x.restr[k - 1][i]) ? 1 : 0;
    }
    return make_subobject(x, std::move(mem));
}

// --- contractiveness --------------------------------------------------------

namespace {

// Backtracking assignment of the free witness slots, level by level.
// g : Later X -> Y; slot (k, u) is g_{k+1}(u) for u in (Later X)(k+1) = X(k).
struct WitnessSearch {
    const TruncatedPresheaf& x;
    const TruncatedPresheaf& y;
    const Morphism& f;
    std::vector<std::vector<int>> g; // g[k][u], -1 = unset

    bool check_link(int k, int u, int val) const {
        // naturality of g at level k: r^Y_{k-1}(g_k(u)) == g_{k-1}(u restricted in Later X)
        if (k == 0) return true;
        int below = (k == 1) ? g[0][0] : g[k - 1][x.restr[k - 2][u]];
        return y.restr[k - 1][val] == below;
    }

    bool assign_level(int k) {
        if (k == static_cast<int>(g.size())) return true;
        return assign_slot(k, 0);
    }

    bool assign_slot(int k, int u) {
        if (u == static_cast<int>(g[k].size())) return assign_level(k + 1);
        if (g[k][u] >= 0) { // forced by f
            if (!check_link(k, u, g[k][u])) return false;
            return assign_slot(k, u + 1);
        }
        for (int v = 0; v < y.size(k); ++v) {
            if (!check_link(k, u, v)) continue;
            g[k][u] = v;
            if (assign_slot(k, u + 1)) return true;
            g[k][u] = -1;
        }
        return false;
    }
};

} // namespace

std::optional<Morphism> is_contractive_ext(const Morphism& f) {
    const auto& x = f.source;
    const auto& y = f.target;
    const int n = x.depth;
    auto lx = later_obj(x);

    std::vector<std::vector<int>> g(n);
    for (int k = 0; k < n; ++k) g[k].assign(lx.size(k), -1);

    // Forced values: f_1 constant determines g_1(*); f_{k+1} determines g_{k+1}
    // on the image of r_k and must be constant on its fibers.
    if (x.size(0) > 0) {
        int v = f.comp[0][0];
        for (int i = 1; i < x.size(0); ++i)
            if (f.comp[0][i] != v) return std::nullopt;
        g[0][0] = v;
    } else if (y.size(0) == 0) {
        return std::nullopt; // (Later X)(1) = {*} has nowhere to go
    }
    for (int k = 1; k < n; ++k) {
        for (int i = 0; i < x.size(k); ++i) {
            int u = x.restr[k - 1][i]; // element of X(k) = (Later X)(k+1)
            int want = f.comp[k][i];
            if (g[k][u] >= 0 && g[k][u] != want) return std::nullopt;
            g[k][u] = want;
        }
    }

    WitnessSearch search{x, y, f, std::move(g)};
    if (!search.assign_level(0)) return std::nullopt;
    return make_morphism(lx, y, std::move(search.g));
}

GlobalElement fix_point(const Morphism& g) {
    if (g.source != later_obj(g.target))
        throw error("fix_point: morphism must have shape Later X -> X");
    const int n = g.target.depth;
    std::vector<int> picks(n);
    picks[0] = g.comp[0][0];
    for (int k = 1; k < n; ++k) picks[k] = g.comp[k][picks[k - 1]];
    return make_global_element(g.target, std::move(picks));
}

// --- enumeration oracles -----------------------------------------------------

std::vector<GlobalElement> global_elements(const TruncatedPresheaf& x, std::size_t cap) {
    // A compatible chain is determined by its top element.
    if (x.levels.back().size() > cap) throw cap_exceeded("global_elements: top level exceeds cap");
    std::vector<GlobalElement> out;
    const int n = x.depth;
    for (int i = 0; i < x.size(n - 1); ++i) {
        std::vector<int> picks(n);
        picks[n - 1] = i;
        for (int k = n - 1; k > 0; --k) picks[k - 1] = x.restr[k - 1][picks[k]];
        out.push_back(make_global_element(x, std::move(picks)));
    }
    return out;
}

std::vector<Morphism> hom_set(const TruncatedPresheaf& x, const TruncatedPresheaf& y, std::size_t cap) {
    auto e = exponential_full(x, y, cap);
    std::vector<Morphism> out;
    const int top = x.depth - 1;
    for (int t = 0; t < e.object.size(top); ++t)
        out.push_back(make_morphism(x, y, e.components(top, t)));
    return out;
}

bool is_total(const TruncatedPresheaf& x) {
    for (int k = 0; k + 1 < x.depth; ++k) {
        std::vector<char> hit(x.size(k), 0);
        for (int i : x.restr[k]) hit[i] = 1;
        for (char h : hit)
            if (!h) return false;
    }
    return true;
}

// --- morphism algebra ---------------------------------------------------------

Morphism identity_mor(const TruncatedPresheaf& x) {
    std::vector<std::vector<int>> comp(x.depth);
    for (int k = 0; k < x.depth; ++k) {
        comp[k].resize(x.size(k));
        std::iota(comp[k].begin(), comp[k].end(), 0);
    }
    return make_morphism(x, x, std::move(comp));
}

Morphism compose(const Morphism& g, const Morphism& f) {
    if (f.target != g.source) throw error("compose: middle objects differ");
    std::vector<std::vector<int>> comp(f.source.depth);
    for (int k = 0; k < f.source.depth; ++k) {
        comp[k].resize(f.source.size(k));
        for (int i = 0; i < f.source.size(k); ++i) comp[k][i] = g.comp[k][f.comp[k][i]];
    }
    return make_morphism(f.source, g.target, std::move(comp));
}

GlobalElement apply_global(const Morphism& f, const GlobalElement& x) {
    if (x.target != f.source) throw error("apply_global: element not in the morphism's source");
    std::vector<int> picks(f.source.depth);
    for (int k = 0; k < f.source.depth; ++k) picks[k] = f.comp[k][x.picks[k]];
    return make_global_element(f.target, std::move(picks));
}

Morphism constant_mor(const TruncatedPresheaf& source, const GlobalElement& value) {
    std::vector<std::vector<int>> comp(source.depth);
    for (int k = 0; k < source.depth; ++k) comp[k].assign(source.size(k), value.picks[k]);
    return make_morphism(source, value.target, std::move(comp));
}

int n_iso_rank(const Morphism& f) {
    int rank = 0;
    for (int k = 0; k < f.source.depth; ++k) {
        if (f.source.size(k) != f.target.size(k)) break;
        std::vector<char> hit(f.target.size(k), 0);
        bool bij = true;
        for (int i = 0; i < f.source.size(k); ++i) {
            if (hit[f.comp[k][i]]) {
                bij = false;
                break;
            }
            hit[f.comp[k][i]] = 1;
        }
        if (!bij) break;
        rank = k + 1;
    }
    return rank;
}

namespace {

struct IsoSearch {
    const TruncatedPresheaf& x;
    const TruncatedPresheaf& y;
    std::vector<std::vector<int>> bij;   // bij[k][i] = image, -1 unset
    std::vector<std::vector<char>> used; // used[k][j]

    bool level(int k) {
        if (k == x.depth) return true;
        return elem(k, 0);
    }

    bool elem(int k, int i) {
        if (i == x.size(k)) return level(k + 1);
        for (int j = 0; j < y.size(k); ++j) {
            if (used[k][j]) continue;
            if (k > 0 && bij[k - 1][x.restr[k - 1][i]] != y.restr[k - 1][j]) continue;
            bij[k][i] = j;
            used[k][j] = 1;
            if (elem(k, i + 1)) return true;
            bij[k][i] = -1;
            used[k][j] = 0;
        }
        return false;
    }
};

} // namespace

std::optional<Morphism> find_iso(const TruncatedPresheaf& x, const TruncatedPresheaf& y) {
    if (x.depth != y.depth) return std::nullopt;
    for (int k = 0; k < x.depth; ++k)
        if (x.size(k) != y.size(k)) return std::nullopt;
    IsoSearch s{x, y, {}, {}};
    s.bij.resize(x.depth);
    s.used.resize(x.depth);
    for (int k = 0; k < x.depth; ++k) {
        s.bij[k].assign(x.size(k), -1);
        s.used[k].assign(y.size(k), 0);
    }
    if (!s.level(0)) return std::nullopt;
    return make_morphism(x, y, std::move(s.bij));
}

} // namespace tot
