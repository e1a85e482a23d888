#include "fibalg/bar.hpp"

#include <algorithm>
#include <functional>

namespace fibalg {

namespace {

// Collects a linear combination of bar words of one degree.
class WordSum {
public:
    explicit WordSum(const PrimeField& f) : f_(f) {}
    void add(BarWord w, Residue c) {
        if (c == 0) return;
        auto [it, fresh] = terms_.try_emplace(std::move(w), c);
        if (!fresh) {
            it->second = f_.add(it->second, c);
            if (it->second == 0) terms_.erase(it);
        }
    }
    SparseVec vector(const BarComplex& bar) const {
        SparseVec v;
        v.reserve(terms_.size());
        for (const auto& [w, c] : terms_) v.emplace_back(bar.index_of(w), c);
        std::sort(v.begin(), v.end());
        return v;
    }

private:
    const PrimeField& f_;
    std::map<BarWord, Residue> terms_;
};

void add_entry(const PrimeField& f, std::map<std::uint32_t, Residue>& acc, std::uint32_t i, Residue c) {
    if (c == 0) return;
    auto [it, fresh] = acc.try_emplace(i, c);
    if (!fresh) {
        it->second = f.add(it->second, c);
        if (it->second == 0) acc.erase(it);
    }
}

SparseVec to_vec(const std::map<std::uint32_t, Residue>& acc) { return SparseVec(acc.begin(), acc.end()); }

SparseVec column_of(const LinearMapPerDegree& f, int n, std::uint32_t i) {
    if (n < 0 || n > f.top()) throw std::out_of_range("linear map undefined in degree " + std::to_string(n));
    return f.at(n).column(i);
}

}  // namespace

// ---------------------------------------------------------- graded spaces

std::string GradedSpace::label(Basis b) const {
    return "e" + std::to_string(b.degree) + "_" + std::to_string(b.index);
}

FiniteComplex GradedSpace::complex() const {
    std::vector<std::size_t> dims;
    for (int n = 0; n <= top(); ++n) dims.push_back(dim(n));
    FiniteComplex c(field(), direction(), dims);
    for (int n = 0; n <= top(); ++n) {
        int t = n + step(direction());
        if (t < 0 || t > top()) continue;
        std::vector<SparseVec> cols;
        for (std::uint32_t i = 0; i < dim(n); ++i) cols.push_back(differential({n, i}));
        c.set_differential(n, Matrix::from_columns(field(), dim(t), std::move(cols)));
    }
    return c;
}

SparseVec GradedAlgebra::multiply(int i, const SparseVec& a, int j, const SparseVec& b) const {
    std::map<std::uint32_t, Residue> acc;
    const PrimeField& f = field();
    for (auto [x, u] : a)
        for (auto [y, v] : b)
            for (auto [z, w] : multiply(Basis{i, x}, Basis{j, y})) add_entry(f, acc, z, f.mul(f.mul(u, v), w));
    return to_vec(acc);
}

SparseVec GradedModule::right_act(Basis, Basis) const { throw std::logic_error("module has no right action"); }
SparseVec GradedModule::left_act(Basis, Basis) const { throw std::logic_error("module has no left action"); }

// ------------------------------------------------------ FreeAlgebraData

FreeAlgebraData::FreeAlgebraData(std::shared_ptr<const FreeCDGA> alg, Direction dir) : alg_(std::move(alg)), dir_(dir) {
    if (dir_ == Direction::chain && !alg_->has_zero_differential())
        throw std::invalid_argument("chain orientation of a free algebra needs a zero differential");
}

std::size_t FreeAlgebraData::dim(int n) const { return n < 0 || n > top() ? 0 : alg_->basis(n).size(); }

SparseVec FreeAlgebraData::differential(Basis b) const {
    int t = b.degree + step(dir_);
    if (t < 0 || dir_ == Direction::chain) return {};
    if (t > top()) throw std::out_of_range("differential leaves the truncation");
    return alg_->to_vector(alg_->differential(alg_->basis(b.degree).monomials.at(b.index)), t);
}

std::string FreeAlgebraData::label(Basis b) const { return alg_->to_string(alg_->basis(b.degree).monomials.at(b.index)); }

SparseVec FreeAlgebraData::multiply(Basis a, Basis b) const {
    int n = a.degree + b.degree;
    if (n > top()) throw std::out_of_range("product leaves the truncation");
    auto r = alg_->multiply(alg_->basis(a.degree).monomials.at(a.index), alg_->basis(b.degree).monomials.at(b.index));
    if (!r) return {};
    return {{alg_->basis(n).index.at(r->monomial), r->coeff}};
}

// ------------------------------------------------------------ PairIndex

PairIndex::PairIndex(const GradedSpace& a, const GradedSpace& b, int top) {
    top_ = std::min({top, a.top(), b.top()});
    for (int j = 0; j <= top_; ++j) right_dims_.push_back(b.dim(j));
    for (int n = 0; n <= top_; ++n) {
        std::vector<std::size_t> offs;
        std::size_t total = 0;
        for (int i = 0; i <= n; ++i) {
            offs.push_back(total);
            total += a.dim(i) * b.dim(n - i);
        }
        offsets_.push_back(std::move(offs));
        dims_.push_back(total);
    }
}

std::uint32_t PairIndex::index(Basis x, Basis y) const {
    int n = x.degree + y.degree;
    if (n < 0 || n > top_) throw std::out_of_range("tensor degree outside truncation");
    return static_cast<std::uint32_t>(offsets_[n][x.degree] + x.index * right_dims_[y.degree] + y.index);
}

std::pair<Basis, Basis> PairIndex::split(int n, std::uint32_t idx) const {
    const auto& offs = offsets_.at(n);
    int i = static_cast<int>(std::upper_bound(offs.begin(), offs.end(), static_cast<std::size_t>(idx)) - offs.begin()) - 1;
    std::size_t local = idx - offs[i];
    std::size_t bd = right_dims_[n - i];
    return {Basis{i, static_cast<std::uint32_t>(local / bd)}, Basis{n - i, static_cast<std::uint32_t>(local % bd)}};
}

// ---------------------------------------------------- TensorAlgebraData

TensorAlgebraData::TensorAlgebraData(AlgebraPtr a, AlgebraPtr b) : a_(std::move(a)), b_(std::move(b)) {
    if (!(a_->field() == b_->field()) || a_->direction() != b_->direction())
        throw std::invalid_argument("tensor of incompatible algebras");
    pairs_ = PairIndex(*a_, *b_, std::min(a_->top(), b_->top()));
}

static SparseVec tensor_differential(const GradedSpace& a, const GradedSpace& b, const PairIndex& pairs, Basis x,
                                     Basis y) {
    const PrimeField& f = a.field();
    const int dir = step(a.direction());
    std::map<std::uint32_t, Residue> acc;
    if (x.degree + dir >= 0)
        for (auto [i, c] : a.differential(x)) add_entry(f, acc, pairs.index({x.degree + dir, i}, y), c);
    if (y.degree + dir >= 0) {
        Residue sgn = f.sign(x.degree);
        for (auto [j, c] : b.differential(y)) add_entry(f, acc, pairs.index(x, {y.degree + dir, j}), f.mul(sgn, c));
    }
    return to_vec(acc);
}

SparseVec TensorAlgebraData::differential(Basis b) const {
    int t = b.degree + step(direction());
    if (t < 0) return {};
    if (t > top()) throw std::out_of_range("differential leaves the truncation");
    auto [x, y] = split(b);
    return tensor_differential(*a_, *b_, pairs_, x, y);
}

std::string TensorAlgebraData::label(Basis b) const {
    auto [x, y] = split(b);
    return a_->label(x) + "⊗" + b_->label(y);
}

SparseVec TensorAlgebraData::multiply(Basis u, Basis v) const {
    if (u.degree + v.degree > top()) throw std::out_of_range("product leaves the truncation");
    const PrimeField& f = field();
    auto [a, b] = split(u);
    auto [a2, b2] = split(v);
    Residue sgn = f.sign(static_cast<long long>(b.degree) * a2.degree);
    SparseVec left = a_->multiply(a, a2);
    if (left.empty()) return {};
    SparseVec right = b_->multiply(b, b2);
    std::map<std::uint32_t, Residue> acc;
    for (auto [i, c] : left)
        for (auto [j, e] : right)
            add_entry(f, acc, index({a.degree + a2.degree, i}, {b.degree + b2.degree, j}), f.mul(sgn, f.mul(c, e)));
    return to_vec(acc);
}

// ---------------------------------------------------------------- modules

SparseVec GroundModule::right_act(Basis m, Basis a) const {
    if (m.degree != 0 || a.degree != 0) return {};
    return {{0, 1}};
}

SparseVec GroundModule::left_act(Basis a, Basis n) const {
    if (n.degree != 0 || a.degree != 0) return {};
    return {{0, 1}};
}

PulledBackModule::PulledBackModule(AlgebraPtr m, AlgebraPtr a, LinearMapPerDegree f)
    : m_(std::move(m)), a_(std::move(a)), f_(std::move(f)) {
    if (f_.shift != 0) throw std::invalid_argument("module structure map must have degree 0");
}

SparseVec PulledBackModule::right_act(Basis m, Basis a) const {
    return m_->multiply(m.degree, {{m.index, 1}}, a.degree, column_of(f_, a.degree, a.index));
}

SparseVec PulledBackModule::left_act(Basis a, Basis n) const {
    return m_->multiply(a.degree, column_of(f_, a.degree, a.index), n.degree, {{n.index, 1}});
}

TensorModule::TensorModule(ModulePtr m, ModulePtr p, std::shared_ptr<const TensorAlgebraData> ab)
    : m_(std::move(m)), p_(std::move(p)), ab_(std::move(ab)) {
    pairs_ = PairIndex(*m_, *p_, std::min(m_->top(), p_->top()));
}

SparseVec TensorModule::differential(Basis b) const {
    int t = b.degree + step(direction());
    if (t < 0) return {};
    if (t > top()) throw std::out_of_range("differential leaves the truncation");
    auto [x, y] = split(b);
    return tensor_differential(*m_, *p_, pairs_, x, y);
}

std::string TensorModule::label(Basis b) const {
    auto [x, y] = split(b);
    return m_->label(x) + "⊗" + p_->label(y);
}

SparseVec TensorModule::right_act(Basis mp, Basis ab) const {
    const PrimeField& f = field();
    auto [m, p] = split(mp);
    auto [a, b] = ab_->split(ab);
    Residue sgn = f.sign(static_cast<long long>(p.degree) * a.degree);
    SparseVec ma = m_->right_act(m, a);
    if (ma.empty()) return {};
    SparseVec pb = p_->right_act(p, b);
    std::map<std::uint32_t, Residue> acc;
    for (auto [i, c] : ma)
        for (auto [j, e] : pb)
            add_entry(f, acc, index({m.degree + a.degree, i}, {p.degree + b.degree, j}), f.mul(sgn, f.mul(c, e)));
    return to_vec(acc);
}

SparseVec TensorModule::left_act(Basis ab, Basis nq) const {
    const PrimeField& f = field();
    auto [a, b] = ab_->split(ab);
    auto [n, q] = split(nq);
    Residue sgn = f.sign(static_cast<long long>(b.degree) * n.degree);
    SparseVec an = m_->left_act(a, n);
    if (an.empty()) return {};
    SparseVec bq = p_->left_act(b, q);
    std::map<std::uint32_t, Residue> acc;
    for (auto [i, c] : an)
        for (auto [j, e] : bq)
            add_entry(f, acc, index({a.degree + n.degree, i}, {b.degree + q.degree, j}), f.mul(sgn, f.mul(c, e)));
    return to_vec(acc);
}

// ------------------------------------------------------------ BarComplex

BarComplex::BarComplex(ModulePtr m, AlgebraPtr a, ModulePtr n, int max_degree)
    : m_(std::move(m)), a_(std::move(a)), n_(std::move(n)) {
    if (!(m_->field() == a_->field()) || !(n_->field() == a_->field()))
        throw std::invalid_argument("bar construction over mixed fields");
    if (m_->direction() != a_->direction() || n_->direction() != a_->direction())
        throw std::invalid_argument("bar construction over mixed orientations");
    if (a_->dim(0) != 1) throw std::invalid_argument("bar construction needs a connected algebra");
    const bool cochain = a_->direction() == Direction::cochain;
    if (cochain && a_->dim(1) != 0)
        throw std::invalid_argument("cochain bar construction needs an algebra with nothing in degree 1");
    top_ = std::min({cochain ? a_->top() - 1 : a_->top(), m_->top(), n_->top()});
    if (max_degree >= 0) top_ = std::min(top_, max_degree);
    if (top_ < 0) throw std::invalid_argument("bar construction truncated below degree 0");

    words_.resize(top_ + 1);
    index_.resize(top_ + 1);
    for (int total = 0; total <= top_; ++total) {
        auto& out = words_[total];
        for (int md = 0; md <= total; ++md)
            for (std::uint32_t mi = 0; mi < m_->dim(md); ++mi)
                for (int nd = 0; md + nd <= total; ++nd)
                    for (std::uint32_t ni = 0; ni < n_->dim(nd); ++ni) {
                        BarWord w{{md, mi}, {}, {nd, ni}};
                        std::function<void(int)> grow = [&](int rest) {
                            if (rest == 0) {
                                out.push_back(w);
                                return;
                            }
                            for (int q = 1; q <= rest; ++q) {
                                int ad = q + step(direction());
                                if (ad < 1 || ad > a_->top()) continue;
                                for (std::uint32_t ai = 0; ai < a_->dim(ad); ++ai) {
                                    w.letters.push_back({ad, ai});
                                    grow(rest - q);
                                    w.letters.pop_back();
                                }
                            }
                        };
                        grow(total - md - nd);
                    }
        std::sort(out.begin(), out.end());
        for (std::uint32_t i = 0; i < out.size(); ++i) index_[total].emplace(out[i], i);
    }
}

int BarComplex::degree(const BarWord& w) const {
    int d = w.left.degree + w.right.degree;
    for (const auto& a : w.letters) d += suspended(a.degree);
    return d;
}

std::optional<std::uint32_t> BarComplex::find(const BarWord& w) const {
    int n = degree(w);
    if (n < 0 || n > top_) return std::nullopt;
    auto it = index_[n].find(w);
    if (it == index_[n].end()) return std::nullopt;
    return it->second;
}

std::uint32_t BarComplex::index_of(const BarWord& w) const {
    auto i = find(w);
    if (!i) throw std::out_of_range("bar word " + to_string(w) + " outside the truncation");
    return *i;
}

std::string BarComplex::to_string(const BarWord& w) const {
    std::string s = m_->label(w.left) + "[";
    for (std::size_t i = 0; i < w.letters.size(); ++i) {
        if (i) s += "|";
        s += "s" + a_->label(w.letters[i]);
    }
    return s + "]" + n_->label(w.right);
}

SparseVec BarComplex::d1(const BarWord& w) const {
    const PrimeField& f = field();
    const int dir = step(direction());
    WordSum out(f);
    if (w.left.degree + dir >= 0)
        for (auto [i, c] : m_->differential(w.left)) {
            BarWord v = w;
            v.left = {w.left.degree + dir, i};
            out.add(std::move(v), c);
        }
    long long eps = w.left.degree;  // ε_{i-1}
    for (std::size_t k = 0; k < w.letters.size(); ++k) {
        const Basis& a = w.letters[k];
        // d(sa) = -s(da); components in degree 0 leave the augmentation ideal
        if (a.degree + dir >= 1) {
            Residue sgn = f.neg(f.sign(eps));
            for (auto [i, c] : a_->differential(a)) {
                BarWord v = w;
                v.letters[k] = {a.degree + dir, i};
                out.add(std::move(v), f.mul(sgn, c));
            }
        }
        eps += suspended(a.degree);
    }
    if (w.right.degree + dir >= 0) {
        Residue sgn = f.sign(eps);
        for (auto [i, c] : n_->differential(w.right)) {
            BarWord v = w;
            v.right = {w.right.degree + dir, i};
            out.add(std::move(v), f.mul(sgn, c));
        }
    }
    return out.vector(*this);
}

SparseVec BarComplex::d2(const BarWord& w) const {
    const PrimeField& f = field();
    WordSum out(f);
    const std::size_t k = w.letters.size();
    if (k == 0) return {};
    // (-1)^{|m|} m a_1 [sa_2|...] n
    {
        Residue sgn = f.sign(w.left.degree);
        const Basis& a = w.letters[0];
        for (auto [i, c] : m_->right_act(w.left, a)) {
            BarWord v{{w.left.degree + a.degree, i}, {w.letters.begin() + 1, w.letters.end()}, w.right};
            out.add(std::move(v), f.mul(sgn, c));
        }
    }
    long long eps = w.left.degree;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        eps += suspended(w.letters[i].degree);  // ε_i
        Residue sgn = f.sign(eps);
        const Basis& a = w.letters[i];
        const Basis& b = w.letters[i + 1];
        for (auto [j, c] : a_->multiply(a, b)) {
            BarWord v;
            v.left = w.left;
            v.right = w.right;
            v.letters.assign(w.letters.begin(), w.letters.begin() + static_cast<std::ptrdiff_t>(i));
            v.letters.push_back({a.degree + b.degree, j});
            v.letters.insert(v.letters.end(), w.letters.begin() + static_cast<std::ptrdiff_t>(i) + 2, w.letters.end());
            out.add(std::move(v), f.mul(sgn, c));
        }
    }
    // -(-1)^{ε_{k-1}} m[sa_1|...|sa_{k-1}] a_k n; eps now holds ε_{k-1}
    {
        Residue sgn = f.neg(f.sign(eps));
        const Basis& a = w.letters[k - 1];
        for (auto [i, c] : n_->left_act(a, w.right)) {
            BarWord v{w.left, {w.letters.begin(), w.letters.end() - 1}, {a.degree + w.right.degree, i}};
            out.add(std::move(v), f.mul(sgn, c));
        }
    }
    return out.vector(*this);
}

SparseVec BarComplex::d(const BarWord& w) const {
    SparseVec v = d1(w);
    axpy(field(), v, 1, d2(w));
    return v;
}

static Matrix word_matrix(const BarComplex& bar, int n, const std::function<SparseVec(const BarWord&)>& op) {
    int t = n + step(bar.direction());
    if (n < 0 || n > bar.top() || t < 0 || t > bar.top())
        throw std::out_of_range("bar differential undefined in degree " + std::to_string(n));
    std::vector<SparseVec> cols;
    cols.reserve(bar.dim(n));
    for (const auto& w : bar.words(n)) cols.push_back(op(w));
    return Matrix::from_columns(bar.field(), bar.dim(t), std::move(cols));
}

Matrix BarComplex::d1_matrix(int n) const {
    return word_matrix(*this, n, [this](const BarWord& w) { return d1(w); });
}
Matrix BarComplex::d2_matrix(int n) const {
    return word_matrix(*this, n, [this](const BarWord& w) { return d2(w); });
}
Matrix BarComplex::d_matrix(int n) const {
    return word_matrix(*this, n, [this](const BarWord& w) { return d(w); });
}

FiniteComplex BarComplex::complex_of(bool with_d1, bool with_d2) const {
    std::vector<std::size_t> dims;
    for (int n = 0; n <= top_; ++n) dims.push_back(dim(n));
    FiniteComplex c(field(), direction(), dims);
    for (int n = 0; n <= top_; ++n) {
        int t = n + step(direction());
        if (t < 0 || t > top_) continue;
        c.set_differential(n, word_matrix(*this, n, [&](const BarWord& w) {
                               SparseVec v;
                               if (with_d1) v = d1(w);
                               if (with_d2) axpy(field(), v, 1, d2(w));
                               return v;
                           }));
    }
    return c;
}

FiniteComplex BarComplex::complex() const { return complex_of(true, true); }

// --------------------------------------------------------------- bar maps

LinearMapPerDegree bar_map(const BarComplex& source, const BarComplex& target, const LinearMapPerDegree& psi,
                           const LinearMapPerDegree& phi, const LinearMapPerDegree& chi) {
    if (psi.shift != 0 || phi.shift != 0 || chi.shift != 0) throw std::invalid_argument("bar_map expects degree-0 maps");
    const PrimeField& f = source.field();
    LinearMapPerDegree out{0, {}};
    const int top = std::min(source.top(), target.top());
    for (int n = 0; n <= top; ++n) {
        std::vector<SparseVec> cols;
        for (const auto& w : source.words(n)) {
            WordSum sum(f);
            BarWord image;
            image.letters.resize(w.letters.size());
            std::function<void(std::size_t, Residue)> expand = [&](std::size_t k, Residue c) {
                if (k == w.letters.size()) {
                    for (auto [j, e] : column_of(chi, w.right.degree, w.right.index)) {
                        image.right = {w.right.degree, j};
                        sum.add(image, f.mul(c, e));
                    }
                    return;
                }
                const Basis& a = w.letters[k];
                for (auto [j, e] : column_of(phi, a.degree, a.index)) {
                    image.letters[k] = {a.degree, j};
                    expand(k + 1, f.mul(c, e));
                }
            };
            for (auto [j, e] : column_of(psi, w.left.degree, w.left.index)) {
                image.left = {w.left.degree, j};
                expand(0, e);
            }
            cols.push_back(sum.vector(target));
        }
        out.maps.push_back(Matrix::from_columns(f, target.dim(n), std::move(cols)));
    }
    return out;
}

long long aw_sign_exponent(std::size_t i, const std::vector<int>& a, const std::vector<int>& b, int p, int n) {
    const std::size_t k = a.size();
    long long z = 0;
    long long bsum = 0;
    for (std::size_t j = 0; j < k; ++j) {
        z += (p + bsum) * a[j];
        bsum += b[j];
    }
    z += (p + bsum) * n;
    for (std::size_t j = i; j < k; ++j) z += static_cast<long long>(j + 1 - i) * a[j];
    z += static_cast<long long>(k - i) * n;
    z += static_cast<long long>(i) * p;
    for (std::size_t j = 0; j + 1 < i; ++j) z += static_cast<long long>(i - (j + 1)) * b[j];
    return z;
}

LinearMapPerDegree alexander_whitney(const BarComplex& source, const BarComplex& left, const BarComplex& right,
                                     const TensorComplex& target) {
    auto mp = std::dynamic_pointer_cast<const TensorModule>(source.left_ptr());
    auto ab = std::dynamic_pointer_cast<const TensorAlgebraData>(source.algebra_ptr());
    auto nq = std::dynamic_pointer_cast<const TensorModule>(source.right_ptr());
    if (!mp || !ab || !nq) throw std::invalid_argument("Alexander-Whitney needs a bar construction of tensor products");
    const PrimeField& f = source.field();
    const GradedModule& N = left.right_module();
    const GradedModule& P = right.left_module();
    LinearMapPerDegree out{0, {}};
    const int top = std::min(source.top(), target.complex().top());
    for (int deg = 0; deg <= top; ++deg) {
        std::vector<SparseVec> cols;
        for (const auto& w : source.words(deg)) {
            std::map<std::uint32_t, Residue> acc;
            auto [m, p] = mp->split(w.left);
            auto [n, q] = nq->split(w.right);
            const std::size_t k = w.letters.size();
            std::vector<Basis> as, bs;
            std::vector<int> ad, bd;
            for (const auto& l : w.letters) {
                auto [a, b] = ab->split(l);
                as.push_back(a);
                bs.push_back(b);
                ad.push_back(a.degree);
                bd.push_back(b.degree);
            }
            for (std::size_t i = 0; i <= k; ++i) {
                bool ok = true;
                for (std::size_t j = 0; j < i; ++j) ok = ok && as[j].degree > 0;
                for (std::size_t j = i; j < k; ++j) ok = ok && bs[j].degree > 0;
                if (!ok) continue;
                // a_{i+1}···a_k n, acting from the innermost factor outwards
                int nd = n.degree;
                SparseVec nv{{n.index, 1}};
                for (std::size_t j = k; j-- > i;) {
                    SparseVec next;
                    for (auto [x, c] : nv) axpy(f, next, c, N.left_act(as[j], {nd, x}));
                    nd += as[j].degree;
                    nv = std::move(next);
                }
                if (nv.empty()) continue;
                int pd = p.degree;
                SparseVec pv{{p.index, 1}};
                for (std::size_t j = 0; j < i; ++j) {
                    SparseVec next;
                    for (auto [x, c] : pv) axpy(f, next, c, P.right_act({pd, x}, bs[j]));
                    pd += bs[j].degree;
                    pv = std::move(next);
                }
                if (pv.empty()) continue;
                Residue sgn = f.sign(aw_sign_exponent(i, ad, bd, p.degree, n.degree));
                BarWord w1{m, {as.begin(), as.begin() + static_cast<std::ptrdiff_t>(i)}, {}};
                BarWord w2{{}, {bs.begin() + static_cast<std::ptrdiff_t>(i), bs.end()}, q};
                for (auto [x, c] : nv) {
                    w1.right = {nd, x};
                    int d1deg = left.degree(w1);
                    std::uint32_t i1 = left.index_of(w1);
                    for (auto [y, e] : pv) {
                        w2.left = {pd, y};
                        int d2deg = right.degree(w2);
                        std::uint32_t i2 = right.index_of(w2);
                        add_entry(f, acc, target.index(d1deg, d2deg, i1, i2), f.mul(sgn, f.mul(c, e)));
                    }
                }
            }
            cols.push_back(to_vec(acc));
        }
        out.maps.push_back(Matrix::from_columns(f, target.complex().dim(deg), std::move(cols)));
    }
    return out;
}

// ------------------------------------------------------------ diagonals

LinearMapPerDegree augmentation(const GradedSpace& s) {
    if (s.dim(0) != 1) throw std::invalid_argument("augmentation needs a one-dimensional degree 0");
    LinearMapPerDegree e{0, {}};
    for (int n = 0; n <= s.top(); ++n) {
        if (n == 0) e.maps.push_back(Matrix::identity(s.field(), 1));
        else e.maps.emplace_back(s.field(), 0, s.dim(n));
    }
    return e;
}

FiniteComplex ground_complex(PrimeField f, Direction dir, int top) {
    std::vector<std::size_t> dims(top + 1, 0);
    dims[0] = 1;
    FiniteComplex c(f, dir, dims);
    for (int n = 0; n <= top; ++n) {
        int t = n + step(dir);
        if (t >= 0 && t <= top) c.set_differential(n, Matrix(f, dims[t], dims[n]));
    }
    return c;
}

LinearMapPerDegree identity_map(const GradedSpace& s) {
    LinearMapPerDegree id{0, {}};
    for (int n = 0; n <= s.top(); ++n) id.maps.push_back(Matrix::identity(s.field(), s.dim(n)));
    return id;
}

LinearMapPerDegree differential_map(const FiniteComplex& c) {
    LinearMapPerDegree d{step(c.direction()), {}};
    for (int n = 0; n <= c.top() && c.has_differential(n); ++n) d.maps.push_back(c.differential(n));
    return d;
}

// (ε⊗1)Δ and (1⊗ε)Δ on a space with a PairIndex-based diagonal
static std::optional<int> pair_counit_failure(const GradedSpace& s, const PairIndex& pairs, const LinearMapPerDegree& delta,
                                              const LinearMapPerDegree& eps, int top) {
    const PrimeField& f = s.field();
    for (int n = 0; n <= top; ++n) {
        for (std::uint32_t x = 0; x < s.dim(n); ++x) {
            SparseVec dx = column_of(delta, n, x);
            std::map<std::uint32_t, Residue> left, right;
            for (auto [idx, c] : dx) {
                auto [u, v] = pairs.split(n, idx);
                if (u.degree == 0)
                    for (auto [z, e] : column_of(eps, 0, u.index)) {
                        (void)z;
                        add_entry(f, left, v.index, f.mul(c, e));
                    }
                if (v.degree == 0)
                    for (auto [z, e] : column_of(eps, 0, v.index)) {
                        (void)z;
                        add_entry(f, right, u.index, f.mul(c, e));
                    }
            }
            SparseVec unit{{x, 1}};
            if (to_vec(left) != unit || to_vec(right) != unit) return n;
        }
    }
    return std::nullopt;
}

BarDiagonal bar_diagonal(std::shared_ptr<const BarComplex> bar, const LinearMapPerDegree& delta_a,
                         const LinearMapPerDegree& delta_m, const LinearMapPerDegree& eps_m,
                         const LinearMapPerDegree& delta_n, const LinearMapPerDegree& eps_n) {
    for (const auto* m : {&delta_a, &delta_m, &eps_m, &delta_n, &eps_n})
        if (m->shift != 0) throw std::invalid_argument("diagonals and counits must have degree 0");
    BarDiagonal out;
    out.aa = std::make_shared<TensorAlgebraData>(bar->algebra_ptr(), bar->algebra_ptr());
    out.mm = std::make_shared<TensorModule>(bar->left_ptr(), bar->left_ptr(), out.aa);
    out.nn = std::make_shared<TensorModule>(bar->right_ptr(), bar->right_ptr(), out.aa);
    const int top = bar->top();

    PairIndex apairs(bar->algebra(), bar->algebra(), bar->algebra().top());
    PairIndex mpairs(bar->left_module(), bar->left_module(), bar->left_module().top());
    PairIndex npairs(bar->right_module(), bar->right_module(), bar->right_module().top());
    LinearMapPerDegree eps_a = augmentation(bar->algebra());
    if (pair_counit_failure(bar->algebra(), apairs, delta_a, eps_a, std::min(top + 1, delta_a.top())))
        throw std::invalid_argument("algebra diagonal is not counital");
    if (pair_counit_failure(bar->left_module(), mpairs, delta_m, eps_m, std::min(top, delta_m.top())))
        throw std::invalid_argument("left module diagonal is not counital");
    if (pair_counit_failure(bar->right_module(), npairs, delta_n, eps_n, std::min(top, delta_n.top())))
        throw std::invalid_argument("right module diagonal is not counital");

    out.doubled = std::make_shared<BarComplex>(out.mm, out.aa, out.nn, top);
    FiniteComplex b = bar->complex();
    out.product = std::make_shared<TensorComplex>(b, b, top);
    LinearMapPerDegree lift = bar_map(*bar, *out.doubled, delta_m, delta_a, delta_n);
    out.delta = compose(alexander_whitney(*out.doubled, *bar, *bar, *out.product), lift);

    out.counit = LinearMapPerDegree{0, {}};
    const PrimeField& f = bar->field();
    for (int n = 0; n <= top; ++n) {
        std::vector<SparseVec> cols;
        for (const auto& w : bar->words(n)) {
            SparseVec col;
            if (n == 0 && w.letters.empty()) {
                Residue e = f.mul(entry(column_of(eps_m, 0, w.left.index), 0), entry(column_of(eps_n, 0, w.right.index), 0));
                if (e) col.emplace_back(0, e);
            }
            cols.push_back(col);
        }
        out.counit.maps.push_back(Matrix::from_columns(f, n == 0 ? 1 : 0, std::move(cols)));
    }
    return out;
}

std::optional<int> counit_failure(const BarComplex& bar, const BarDiagonal& diag) {
    const PrimeField& f = bar.field();
    const TensorComplex& bb = *diag.product;
    for (int n = 0; n <= std::min(bar.top(), diag.delta.top()); ++n) {
        for (std::uint32_t x = 0; x < bar.dim(n); ++x) {
            std::map<std::uint32_t, Residue> left, right;
            for (auto [idx, c] : diag.delta.at(n).column(x)) {
                auto s = bb.split(n, idx);
                int j = n - s.left_degree;
                if (s.left_degree == 0) {
                    Residue e = entry(diag.counit.at(0).column(s.left), 0);
                    add_entry(f, left, static_cast<std::uint32_t>(s.right), f.mul(c, e));
                }
                if (j == 0) {
                    Residue e = entry(diag.counit.at(0).column(s.right), 0);
                    add_entry(f, right, static_cast<std::uint32_t>(s.left), f.mul(c, e));
                }
            }
            SparseVec unit{{x, 1}};
            if (to_vec(left) != unit || to_vec(right) != unit) return n;
        }
    }
    return std::nullopt;
}

LinearMapPerDegree primitive_coproduct(const FreeAlgebraData& a, const TensorAlgebraData& aa) {
    const FreeCDGA& alg = a.algebra();
    const PrimeField& f = alg.field();
    const int top = aa.top();
    auto gen_vec = [&](std::uint32_t g, std::uint32_t k) -> SparseVec {
        // Δγ^k(w) = Σ γ^i(w)⊗γ^{k-i}(w); for k = 1 this is g⊗1 + 1⊗g
        const Generator& gen = alg.generators()[g];
        std::map<std::uint32_t, Residue> acc;
        for (std::uint32_t i = 0; i <= k; ++i) {
            Monomial l = i ? Monomial::single(g, i) : Monomial::unit();
            Monomial r = (k - i) ? Monomial::single(g, k - i) : Monomial::unit();
            int ld = gen.degree * static_cast<int>(i), rd = gen.degree * static_cast<int>(k - i);
            add_entry(f, acc, aa.index({ld, alg.basis(ld).index.at(l)}, {rd, alg.basis(rd).index.at(r)}), 1);
        }
        return to_vec(acc);
    };
    LinearMapPerDegree delta{0, {}};
    for (int n = 0; n <= top; ++n) {
        std::vector<SparseVec> cols;
        for (const auto& m : alg.basis(n).monomials) {
            SparseVec v{{0, 1}};
            int deg = 0;
            for (const auto& fac : m.factors) {
                const Generator& gen = alg.generators()[fac.gen];
                if (gen.is_divided()) {
                    v = aa.multiply(deg, v, gen.degree * static_cast<int>(fac.index), gen_vec(fac.gen, fac.index));
                    deg += gen.degree * static_cast<int>(fac.index);
                } else {
                    for (std::uint32_t e = 0; e < fac.index; ++e) {
                        v = aa.multiply(deg, v, gen.degree, gen_vec(fac.gen, 1));
                        deg += gen.degree;
                    }
                }
            }
            cols.push_back(v);
        }
        delta.maps.push_back(Matrix::from_columns(f, aa.dim(n), std::move(cols)));
    }
    return delta;
}

// --------------------------------------------------------------- collapse

Collapse collapse(const BarComplex& bar) {
    const GradedModule& M = bar.left_module();
    const GradedAlgebra& A = bar.algebra();
    const GradedModule& N = bar.right_module();
    const PrimeField& f = bar.field();
    const int top = bar.top();
    const int dir = step(bar.direction());
    Collapse out;
    out.pairs = PairIndex(M, N, top);
    std::vector<std::vector<std::int64_t>> position(top + 1);
    std::vector<std::size_t> dims;
    for (int n = 0; n <= top; ++n) {
        EchelonBasis rel(f, out.pairs.dim(n));
        for (int md = 0; md <= n; ++md)
            for (int ad = 1; md + ad <= n; ++ad)
                for (int nd = 0; md + ad + nd <= n; ++nd) {
                    if (md + ad + nd != n) continue;
                    for (std::uint32_t mi = 0; mi < M.dim(md); ++mi)
                        for (std::uint32_t ai = 0; ai < A.dim(ad); ++ai)
                            for (std::uint32_t ni = 0; ni < N.dim(nd); ++ni) {
                                SparseVec r;
                                for (auto [x, c] : M.right_act({md, mi}, {ad, ai}))
                                    r.emplace_back(out.pairs.index({md + ad, x}, {nd, ni}), c);
                                std::sort(r.begin(), r.end());
                                SparseVec s;
                                for (auto [y, c] : N.left_act({ad, ai}, {nd, ni}))
                                    s.emplace_back(out.pairs.index({md, mi}, {ad + nd, y}), c);
                                std::sort(s.begin(), s.end());
                                axpy(f, r, f.neg(1), s);
                                rel.insert(std::move(r));
                            }
                }
        std::vector<std::uint32_t> kept;
        position[n].assign(out.pairs.dim(n), -1);
        for (std::uint32_t j = 0; j < out.pairs.dim(n); ++j)
            if (!rel.is_pivot(j)) {
                position[n][j] = static_cast<std::int64_t>(kept.size());
                kept.push_back(j);
            }
        dims.push_back(kept.size());
        out.relations.push_back(std::move(rel));
        out.kept.push_back(std::move(kept));
    }
    auto project = [&](int n, SparseVec v) {
        v = out.relations[n].reduce(std::move(v));
        SparseVec r;
        for (auto [j, c] : v) r.emplace_back(static_cast<std::uint32_t>(position[n][j]), c);
        return r;
    };
    out.quotient = FiniteComplex(f, bar.direction(), dims);
    for (int n = 0; n <= top; ++n) {
        int t = n + dir;
        if (t < 0 || t > top) continue;
        std::vector<SparseVec> cols;
        for (std::uint32_t j : out.kept[n]) {
            auto [x, y] = out.pairs.split(n, j);
            SparseVec v;
            if (x.degree + dir >= 0)
                for (auto [i, c] : M.differential(x)) v.emplace_back(out.pairs.index({x.degree + dir, i}, y), c);
            if (y.degree + dir >= 0) {
                Residue sgn = f.sign(x.degree);
                for (auto [i, c] : N.differential(y)) v.emplace_back(out.pairs.index(x, {y.degree + dir, i}), f.mul(sgn, c));
            }
            std::sort(v.begin(), v.end());
            cols.push_back(project(t, std::move(v)));
        }
        out.quotient.set_differential(n, Matrix::from_columns(f, dims[t], std::move(cols)));
    }
    out.map = LinearMapPerDegree{0, {}};
    for (int n = 0; n <= top; ++n) {
        std::vector<SparseVec> cols;
        for (const auto& w : bar.words(n)) {
            if (!w.letters.empty()) {
                cols.emplace_back();
                continue;
            }
            cols.push_back(project(n, {{out.pairs.index(w.left, w.right), 1}}));
        }
        out.map.maps.push_back(Matrix::from_columns(f, dims[n], std::move(cols)));
    }
    return out;
}

// ------------------------------------------------------------ homotopies

std::optional<int> multiplicativity_failure(const GradedAlgebra& a, const GradedAlgebra& b, const LinearMapPerDegree& f) {
    const int top = std::min({a.top(), b.top(), f.top()});
    const PrimeField& fld = a.field();
    if (column_of(f, 0, 0) != SparseVec{{0, 1}}) return 0;
    for (int i = 1; i <= top; ++i)
        for (int j = i; i + j <= top; ++j)
            for (std::uint32_t x = 0; x < a.dim(i); ++x)
                for (std::uint32_t y = 0; y < a.dim(j); ++y) {
                    SparseVec lhs = f.at(i + j).apply(a.multiply({i, x}, {j, y}));
                    SparseVec rhs = b.multiply(i, f.at(i).column(x), j, f.at(j).column(y));
                    if (lhs != rhs) return i + j;
                }
    (void)fld;
    return std::nullopt;
}

LinearMapPerDegree extend_algebra_homotopy(const AlgebraMorphism& f, const AlgebraMorphism& g,
                                           const std::vector<Element>& on_generators) {
    const FreeCDGA& src = f.source();
    const FreeCDGA& tgt = f.target();
    if (!(g.source().generators() == src.generators()) || !(g.target().generators() == tgt.generators()))
        throw std::invalid_argument("homotopy between morphisms with different ends");
    if (on_generators.size() != src.generators().size())
        throw std::invalid_argument("homotopy needs one value per generator");
    const PrimeField& fld = src.field();
    const int top = std::min(src.truncation(), tgt.truncation() + 1);
    std::map<Monomial, Element> memo;
    std::function<Element(const Monomial&)> h = [&](const Monomial& m) -> Element {
        if (m.is_unit()) return {};
        auto it = memo.find(m);
        if (it != memo.end()) return it->second;
        const Factor& first = m.factors.front();
        Monomial x = Monomial::single(first.gen, 1);
        Monomial rest = m;
        if (first.index == 1) rest.factors.erase(rest.factors.begin());
        else rest.factors.front().index -= 1;
        auto prod = src.multiply(x, rest);
        if (!prod || prod->monomial != m)
            throw MathError("cannot peel a generator off " + src.to_string(m));
        const Element& hx = on_generators[first.gen];
        Element term = tgt.multiply(hx, g.apply(Element::of(rest)));
        Element fx = f.apply(Element::of(x));
        Element second = tgt.scale(tgt.multiply(fx, h(rest)), fld.sign(src.generators()[first.gen].degree));
        Element value = tgt.scale(tgt.add(term, second), fld.inv(prod->coeff));
        memo.emplace(m, value);
        return value;
    };
    for (std::uint32_t gi = 0; gi < on_generators.size(); ++gi) {
        auto d = tgt.degree(on_generators[gi]);
        if (d && *d != src.generators()[gi].degree - 1)
            throw std::invalid_argument("homotopy value on " + src.generators()[gi].name + " has wrong degree");
    }
    LinearMapPerDegree out{-1, {}};
    for (int n = 0; n <= top; ++n) {
        std::vector<SparseVec> cols;
        std::size_t rows = n == 0 ? 0 : tgt.basis(n - 1).size();
        for (const auto& m : src.basis(n).monomials) cols.push_back(n == 0 ? SparseVec{} : tgt.to_vector(h(m), n - 1));
        out.maps.push_back(Matrix::from_columns(fld, rows, std::move(cols)));
    }
    return out;
}

std::optional<int> homotopy_failure(const FiniteComplex& source, const FiniteComplex& target,
                                    const LinearMapPerDegree& f, const LinearMapPerDegree& g,
                                    const LinearMapPerDegree& h) {
    const int dir = step(source.direction());
    if (h.shift != -dir) throw std::invalid_argument("homotopy has the wrong degree");
    const PrimeField& fld = source.field();
    const int top = std::min({source.top(), target.top(), f.top(), g.top()});
    for (int n = 0; n <= top; ++n) {
        // d_T H_n + H_{n+dir} d_S,n = f_n - g_n
        Matrix lhs(fld, target.dim(n), source.dim(n));
        int mid = n - dir;  // target degree of H_n
        if (mid >= 0) {
            if (mid > target.top() || !target.has_differential(mid) || n > h.top()) continue;
            lhs = lhs + target.differential(mid) * h.at(n);
        }
        int next = n + dir;
        if (next >= 0) {
            if (next > source.top() || !source.has_differential(n) || next > h.top()) continue;
            lhs = lhs + h.at(next) * source.differential(n);
        }
        if (!(lhs == f.at(n) - g.at(n))) return n;
    }
    return std::nullopt;
}

std::optional<LinearMapPerDegree> homotopy_solve(const FiniteComplex& source, const FiniteComplex& target,
                                                 const LinearMapPerDegree& f, const LinearMapPerDegree& g) {
    const int dir = step(source.direction());
    const PrimeField& fld = source.field();
    if (f.shift != 0 || g.shift != 0) throw std::invalid_argument("homotopy_solve expects degree-0 maps");
    int top = std::min({source.top(), target.top(), f.top(), g.top()});
    const int eq_top = std::min(top, (dir < 0 ? target.top() : source.top()) - 1);
    const int h_top = eq_top + (dir > 0 ? 1 : 0);
    if (eq_top < 0) return LinearMapPerDegree{-dir, {}};

    auto hrows = [&](int m) { return target.dim(m - dir); };
    std::vector<std::size_t> hoff(h_top + 2, 0), eoff(eq_top + 2, 0);
    for (int m = 0; m <= h_top; ++m) hoff[m + 1] = hoff[m] + hrows(m) * source.dim(m);
    for (int n = 0; n <= eq_top; ++n) eoff[n + 1] = eoff[n] + target.dim(n) * source.dim(n);
    auto eq_index = [&](int n, std::size_t r, std::size_t c) {
        return static_cast<std::uint32_t>(eoff[n] + c * target.dim(n) + r);
    };

    std::vector<SparseVec> cols(hoff[h_top + 1]);
    for (int m = 0; m <= h_top; ++m) {
        const std::size_t rows = hrows(m);
        if (rows == 0) continue;
        int tm = m - dir;
        std::optional<Matrix> dT;
        if (m <= eq_top) dT = target.differential(tm);  // T_{m-dir} -> T_m
        int n = m - dir;  // equation where H_m appears on the right of d_S
        std::optional<Matrix> dSt;
        if (n >= 0 && n <= eq_top) dSt = source.differential(n).transpose();  // rows: S_m
        for (std::size_t c = 0; c < source.dim(m); ++c)
            for (std::size_t r = 0; r < rows; ++r) {
                SparseVec col;
                if (dT)
                    for (auto [i, v] : dT->column(r)) col.emplace_back(eq_index(m, i, c), v);
                if (dSt)
                    for (auto [cc, v] : dSt->column(c)) col.emplace_back(eq_index(n, r, cc), v);
                std::sort(col.begin(), col.end());
                // entries may coincide only when both blocks hit the same equation, which they do not
                cols[hoff[m] + c * rows + r] = std::move(col);
            }
    }
    SparseVec rhs;
    for (int n = 0; n <= eq_top; ++n) {
        Matrix diff = f.at(n) - g.at(n);
        for (std::size_t c = 0; c < source.dim(n); ++c)
            for (auto [r, v] : diff.column(c)) rhs.emplace_back(eq_index(n, r, c), v);
    }
    std::sort(rhs.begin(), rhs.end());
    Matrix system = Matrix::from_columns(fld, eoff[eq_top + 1], std::move(cols));
    auto x = solve(system, rhs);
    if (!x) return std::nullopt;

    LinearMapPerDegree h{-dir, {}};
    for (int m = 0; m <= h_top; ++m) {
        const std::size_t rows = hrows(m);
        std::vector<SparseVec> mc(source.dim(m));
        for (auto [var, v] : *x) {
            if (var < hoff[m] || var >= hoff[m + 1]) continue;
            std::size_t local = var - hoff[m];
            mc[local / rows].emplace_back(static_cast<std::uint32_t>(local % rows), v);
        }
        for (auto& col : mc) std::sort(col.begin(), col.end());
        h.maps.push_back(Matrix::from_columns(fld, rows, std::move(mc)));
    }
    return h;
}

// ------------------------------------------------------------------ theta

static std::optional<std::string> algebra_homotopy_failure(const GradedAlgebra& a, const GradedAlgebra& b,
                                                           const LinearMapPerDegree& f, const LinearMapPerDegree& g,
                                                           const LinearMapPerDegree& h, const char* name) {
    const PrimeField& fld = a.field();
    FiniteComplex ca = a.complex(), cb = b.complex();
    if (auto n = homotopy_failure(ca, cb, f, g, h))
        return std::string(name) + ": hd + dh != f - g in degree " + std::to_string(*n);
    const int shift = h.shift;
    // ε h = 0: nothing may land in degree 0
    for (int n = 0; n <= h.top(); ++n)
        if (n + shift == 0 && !h.at(n).is_zero()) return std::string(name) + " does not vanish under the augmentation";
    const int top = std::min({a.top(), h.top(), b.top() - shift});
    for (int i = 0; i <= top; ++i)
        for (int j = 0; i + j <= top; ++j)
            for (std::uint32_t x = 0; x < a.dim(i); ++x)
                for (std::uint32_t y = 0; y < a.dim(j); ++y) {
                    SparseVec lhs = h.at(i + j).apply(a.multiply({i, x}, {j, y}));
                    SparseVec rhs;
                    if (i + shift >= 0) rhs = b.multiply(i + shift, h.at(i).column(x), j, g.at(j).column(y));
                    if (j + shift >= 0)
                        axpy(fld, rhs, fld.sign(i), b.multiply(i, f.at(i).column(x), j + shift, h.at(j).column(y)));
                    if (lhs != rhs) return std::string(name) + " violates the product rule in degree " + std::to_string(i + j);
                }
    return std::nullopt;
}

std::optional<std::string> theta_hypothesis_failure(const ThetaData& d) {
    const GradedAlgebra& A = d.source->algebra();
    const GradedAlgebra& A2 = d.target->algebra();
    const GradedAlgebra& M = *d.m;
    const GradedAlgebra& M2 = *d.m2;
    struct Named {
        const GradedAlgebra* from;
        const GradedAlgebra* to;
        const LinearMapPerDegree* map;
        const char* name;
    };
    for (const Named& x : {Named{&A, &M, &d.f, "f"}, Named{&A2, &M2, &d.g, "g"}, Named{&A, &A2, &d.phi, "phi"},
                           Named{&A, &A2, &d.phi2, "phi'"}, Named{&M, &M2, &d.psi, "psi"},
                           Named{&M, &M2, &d.psi2, "psi'"}}) {
        if (auto n = multiplicativity_failure(*x.from, *x.to, *x.map))
            return std::string(x.name) + " is not multiplicative in degree " + std::to_string(*n);
        if (auto n = chain_map_failure(x.from->complex(), x.to->complex(), *x.map))
            return std::string(x.name) + " does not commute with d in degree " + std::to_string(*n);
    }
    if (auto e = algebra_homotopy_failure(A, A2, d.phi, d.phi2, d.h, "h")) return e;
    if (auto e = algebra_homotopy_failure(M, M2, d.psi, d.psi2, d.h2, "h'")) return e;
    auto equal = [](const LinearMapPerDegree& x, const LinearMapPerDegree& y) {
        int top = std::min(x.top(), y.top());
        for (int n = 0; n <= top; ++n)
            if (!(x.at(n) == y.at(n))) return false;
        return true;
    };
    if (!equal(compose(d.h2, d.f), compose(d.g, d.h))) return std::string("h' f != g h");
    if (!equal(compose(d.psi, d.f), compose(d.g, d.phi))) return std::string("psi f != g phi");
    if (!equal(compose(d.psi2, d.f), compose(d.g, d.phi2))) return std::string("psi' f != g phi'");
    return std::nullopt;
}

LinearMapPerDegree theta(const ThetaData& d) {
    if (auto e = theta_hypothesis_failure(d)) throw MathError("invalid homotopy data: " + *e);
    const BarComplex& S = *d.source;
    const BarComplex& T = *d.target;
    const PrimeField& f = S.field();
    const int shift = d.h.shift;
    LinearMapPerDegree out{shift, {}};
    for (int n = 0; n <= S.top(); ++n) {
        int tn = n + shift;
        if (tn > T.top()) break;
        std::vector<SparseVec> cols;
        for (const auto& w : S.words(n)) {
            if (tn < 0) {
                cols.emplace_back();
                continue;
            }
            WordSum sum(f);
            const std::size_t k = w.letters.size();
            BarWord image;
            image.right = w.right;
            image.letters.resize(k);
            // letters: j < i through φ, j == i through h, j > i through φ'
            std::function<void(std::ptrdiff_t, std::ptrdiff_t, Residue)> expand = [&](std::ptrdiff_t j, std::ptrdiff_t i,
                                                                                      Residue c) {
                if (j == static_cast<std::ptrdiff_t>(k)) {
                    sum.add(image, c);
                    return;
                }
                const Basis& a = w.letters[j];
                const LinearMapPerDegree& map = j < i ? d.phi : (j == i ? d.h : d.phi2);
                int deg = a.degree + (j == i ? shift : 0);
                if (deg < 1) return;
                for (auto [x, e] : column_of(map, a.degree, a.index)) {
                    image.letters[j] = {deg, x};
                    expand(j + 1, i, f.mul(c, e));
                }
            };
            if (w.left.degree + shift >= 0)
                for (auto [x, e] : column_of(d.h2, w.left.degree, w.left.index)) {
                    image.left = {w.left.degree + shift, x};
                    expand(0, -1, e);  // every letter through φ'
                }
            long long eps = w.left.degree;
            for (std::size_t i = 0; i < k; ++i) {
                Residue sgn = f.neg(f.sign(eps));
                for (auto [x, e] : column_of(d.psi, w.left.degree, w.left.index)) {
                    image.left = {w.left.degree, x};
                    expand(0, static_cast<std::ptrdiff_t>(i), f.mul(sgn, e));
                }
                eps += S.suspended(w.letters[i].degree);
            }
            cols.push_back(sum.vector(T));
        }
        out.maps.push_back(Matrix::from_columns(f, T.dim(tn), std::move(cols)));
    }
    return out;
}

}  // namespace fibalg
