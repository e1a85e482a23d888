#include "fibalg/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace fibalg {

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(PrimeField field, std::size_t rows, std::size_t cols)
    : field_(field), rows_(rows), columns_(cols) {}

Matrix Matrix::identity(PrimeField field, std::size_t n) {
    Matrix m(field, n, n);
    for (std::size_t i = 0; i < n; ++i) m.columns_[i] = {{static_cast<std::uint32_t>(i), 1}};
    return m;
}

Matrix Matrix::from_rows(PrimeField field, const std::vector<std::vector<long long>>& rows) {
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows.front().size();
    Matrix m(field, r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) throw std::invalid_argument("ragged matrix rows");
        for (std::size_t j = 0; j < c; ++j) {
            Residue v = field.reduce(rows[i][j]);
            if (v != 0) m.columns_[j].emplace_back(static_cast<std::uint32_t>(i), v);
        }
    }
    return m;
}

Matrix Matrix::from_columns(PrimeField field, std::size_t rows, std::vector<SparseVec> columns) {
    Matrix m(field, rows, 0);
    for (const auto& col : columns)
        for (auto [i, v] : col)
            if (i >= rows || v == 0 || v >= field.prime())
                throw std::invalid_argument("column entry out of range");
    m.columns_ = std::move(columns);
    return m;
}

Residue Matrix::at(std::size_t i, std::size_t j) const {
    return entry(columns_.at(j), static_cast<std::uint32_t>(i));
}

void Matrix::set_column(std::size_t j, SparseVec v) {
    for (auto [i, x] : v)
        if (i >= rows_) throw std::invalid_argument("column entry out of range");
    columns_.at(j) = std::move(v);
}

Matrix Matrix::transpose() const {
    Matrix t(field_, cols(), rows_);
    for (std::uint32_t j = 0; j < cols(); ++j)
        for (auto [i, v] : columns_[j]) t.columns_[i].emplace_back(j, v);
    return t;
}

SparseVec Matrix::apply(const SparseVec& x) const {
    SparseVec y;
    for (auto [j, v] : x) axpy(field_, y, v, columns_.at(j));
    return y;
}

Vector Matrix::apply(const Vector& x) const {
    if (x.size() != cols()) throw std::invalid_argument("dimension mismatch in Matrix::apply");
    return to_dense(apply(to_sparse(x)), rows_);
}

bool Matrix::is_zero() const {
    return std::all_of(columns_.begin(), columns_.end(), [](const SparseVec& c) { return c.empty(); });
}

bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.columns_ == b.columns_;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("dimension mismatch in matrix product");
    Matrix out(a.field(), a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) out.set_column(j, a.apply(b.column(j)));
    return out;
}

static Matrix combine(const Matrix& a, const Matrix& b, Residue coeff) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument("dimension mismatch in matrix sum");
    Matrix out = a;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        SparseVec c = a.column(j);
        axpy(a.field(), c, coeff, b.column(j));
        out.set_column(j, std::move(c));
    }
    return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) { return combine(a, b, 1); }
Matrix operator-(const Matrix& a, const Matrix& b) { return combine(a, b, a.field().neg(1)); }

// ---------------------------------------------------------- EchelonBasis

EchelonBasis::EchelonBasis(PrimeField field, std::size_t dim) : field_(field), pivot_row_(dim, -1) {}

SparseVec EchelonBasis::reduce(SparseVec v) const {
    std::size_t pos = 0;
    while (pos < v.size()) {
        auto [col, val] = v[pos];
        if (col >= pivot_row_.size()) throw std::invalid_argument("vector longer than ambient space");
        std::int64_t r = pivot_row_[col];
        if (r >= 0) {
            // the entry at pos is eliminated; earlier entries are untouched
            axpy(field_, v, field_.neg(val), rows_[static_cast<std::size_t>(r)]);
        } else {
            ++pos;
        }
    }
    return v;
}

bool EchelonBasis::insert(SparseVec v) {
    v = reduce(std::move(v));
    if (v.empty()) return false;
    Residue lead_inv = field_.inv(v.front().second);
    v = scaled(field_, v, lead_inv);
    pivot_row_[v.front().first] = static_cast<std::int64_t>(rows_.size());
    rows_.push_back(std::move(v));
    return true;
}

std::vector<SparseVec> EchelonBasis::reduced_rows() const {
    std::vector<SparseVec> out;
    out.reserve(rows_.size());
    for (std::size_t col = 0; col < pivot_row_.size(); ++col) {
        if (pivot_row_[col] < 0) continue;
        const SparseVec& row = rows_[static_cast<std::size_t>(pivot_row_[col])];
        SparseVec tail(row.begin() + 1, row.end());
        // reducing the tail never reintroduces an entry at or before this pivot
        tail = reduce(std::move(tail));
        SparseVec full;
        full.reserve(tail.size() + 1);
        full.push_back(row.front());
        full.insert(full.end(), tail.begin(), tail.end());
        out.push_back(std::move(full));
    }
    return out;
}

// -------------------------------------------------------- TrackedEchelon

TrackedEchelon::TrackedEchelon(PrimeField field, std::size_t dim) : field_(field), pivot_row_(dim, -1) {}

SparseVec TrackedEchelon::reduce_tracked(SparseVec v, SparseVec& combination) const {
    std::size_t pos = 0;
    while (pos < v.size()) {
        auto [col, val] = v[pos];
        if (col >= pivot_row_.size()) throw std::invalid_argument("vector longer than ambient space");
        std::int64_t r = pivot_row_[col];
        if (r >= 0) {
            Residue a = field_.neg(val);
            axpy(field_, v, a, rows_[static_cast<std::size_t>(r)]);
            axpy(field_, combination, a, combos_[static_cast<std::size_t>(r)]);
        } else {
            ++pos;
        }
    }
    return v;
}

bool TrackedEchelon::insert(const SparseVec& v) {
    SparseVec combo{{static_cast<std::uint32_t>(count_), 1}};
    ++count_;
    SparseVec r = reduce_tracked(v, combo);
    if (r.empty()) return false;
    Residue lead_inv = field_.inv(r.front().second);
    pivot_row_[r.front().first] = static_cast<std::int64_t>(rows_.size());
    rows_.push_back(scaled(field_, r, lead_inv));
    combos_.push_back(scaled(field_, combo, lead_inv));
    return true;
}

std::optional<SparseVec> TrackedEchelon::express(const SparseVec& v) const {
    SparseVec combo;
    SparseVec r = reduce_tracked(v, combo);
    if (!r.empty()) return std::nullopt;
    return scaled(field_, combo, field_.neg(1));
}

// ------------------------------------------------------------- solvers

std::size_t rank(const Matrix& m) { return column_space(m).rank(); }

EchelonBasis column_space(const Matrix& m) {
    EchelonBasis e(m.field(), m.rows());
    for (const auto& c : m.columns()) e.insert(c);
    return e;
}

std::optional<SparseVec> solve(const Matrix& m, const SparseVec& target) {
    const std::size_t n = m.cols();
    Matrix rows = m.transpose();  // column i of `rows` is row i of m
    if (!target.empty() && target.back().first >= m.rows())
        throw std::invalid_argument("target length exceeds matrix rows");
    EchelonBasis e(m.field(), n + 1);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        SparseVec row = rows.column(i);
        Residue t = entry(target, static_cast<std::uint32_t>(i));
        if (t != 0) row.emplace_back(static_cast<std::uint32_t>(n), t);
        e.insert(std::move(row));
    }
    if (e.is_pivot(static_cast<std::uint32_t>(n))) return std::nullopt;
    SparseVec x;
    for (const auto& row : e.reduced_rows()) {
        Residue v = entry(row, static_cast<std::uint32_t>(n));
        if (v != 0) x.emplace_back(row.front().first, v);
    }
    return x;
}

std::optional<Vector> solve(const Matrix& m, const Vector& target) {
    if (target.size() != m.rows()) throw std::invalid_argument("target length mismatch");
    auto x = solve(m, to_sparse(target));
    if (!x) return std::nullopt;
    return to_dense(*x, m.cols());
}

std::vector<SparseVec> kernel_basis(const Matrix& m) {
    const std::size_t n = m.cols();
    Matrix rows = m.transpose();
    EchelonBasis e(m.field(), n);
    for (std::size_t i = 0; i < m.rows(); ++i) e.insert(rows.column(i));
    std::vector<SparseVec> per_free(n);
    const PrimeField& f = m.field();
    for (const auto& row : e.reduced_rows()) {
        std::uint32_t pivot = row.front().first;
        for (std::size_t k = 1; k < row.size(); ++k)
            per_free[row[k].first].emplace_back(pivot, f.neg(row[k].second));
    }
    std::vector<SparseVec> out;
    for (std::uint32_t j = 0; j < n; ++j) {
        if (e.is_pivot(j)) continue;
        SparseVec v = per_free[j];
        v.emplace_back(j, 1);
        std::sort(v.begin(), v.end());
        out.push_back(std::move(v));
    }
    return out;
}

// ------------------------------------------------------------ homology

HomologyData::HomologyData(PrimeField field, std::size_t dim, std::vector<SparseVec> cycles,
                           EchelonBasis boundaries)
    : field_(field), dim_(dim), cycles_(std::move(cycles)), boundaries_(std::move(boundaries)) {
    EchelonBasis span = boundaries_;
    for (const auto& z : cycles_)
        if (span.insert(z)) representatives_.push_back(z);
    reps_.emplace(field_, dim_);
    for (const auto& r : representatives_) reps_->insert(boundaries_.reduce(r));
}

SparseVec HomologyData::class_of(const SparseVec& cycle) const {
    auto c = reps_->express(boundaries_.reduce(cycle));
    if (!c) throw MathError("vector is not a cycle in this degree");
    return *c;
}

HomologyData homology(const ComplexSlice& before, const ComplexSlice& at, const ComplexSlice& after) {
    const std::size_t dim = at.d_out.cols();
    if (before.d_out.rows() != dim) throw std::invalid_argument("incoming differential has wrong target");
    if (at.d_out.rows() != after.d_out.cols()) throw std::invalid_argument("outgoing differential has wrong target");
    if (!(at.d_out * before.d_out).is_zero())
        throw MathError("d∘d != 0 at degree " + std::to_string(at.degree));
    return HomologyData(at.d_out.field(), dim, kernel_basis(at.d_out), column_space(before.d_out));
}

// ------------------------------------------------------- FiniteComplex

FiniteComplex::FiniteComplex(PrimeField field, Direction dir, std::vector<std::size_t> dims)
    : field_(field), dir_(dir), dims_(std::move(dims)), d_(dims_.size()) {}

void FiniteComplex::set_differential(int n, Matrix d) {
    if (n < 0 || n > top()) throw std::out_of_range("differential degree out of range");
    int target = n + step(dir_);
    if (target < 0 || target > top()) throw std::out_of_range("differential target out of range");
    if (d.cols() != dims_[n] || d.rows() != dims_[target])
        throw std::invalid_argument("differential has wrong shape at degree " + std::to_string(n));
    d_[n] = std::move(d);
}

bool FiniteComplex::has_differential(int n) const {
    if (n < 0 || n > top()) return false;
    int target = n + step(dir_);
    if (target < 0) return true;
    return d_[n].has_value();
}

Matrix FiniteComplex::differential(int n) const {
    int target = n + step(dir_);
    if (n >= 0 && n <= top() && target < 0) return Matrix(field_, 0, dims_[n]);
    if (!has_differential(n)) throw std::out_of_range("differential unavailable at degree " + std::to_string(n));
    return *d_[n];
}

Matrix FiniteComplex::incoming(int n) const {
    int source = n - step(dir_);
    if (source < 0) return Matrix(field_, dim(n), 0);
    if (!has_differential(source)) throw std::out_of_range("incoming differential unavailable at degree " + std::to_string(n));
    return *d_[source];
}

bool FiniteComplex::has_homology(int n) const {
    if (n < 0 || n > top() || !has_differential(n)) return false;
    int source = n - step(dir_);
    return source < 0 || has_differential(source);
}

std::size_t FiniteComplex::betti(int n) const {
    if (!has_homology(n)) throw std::out_of_range("homology unavailable at degree " + std::to_string(n));
    return dims_[n] - rank(differential(n)) - rank(incoming(n));
}

std::vector<SparseVec> FiniteComplex::cycles(int n) const { return kernel_basis(differential(n)); }

EchelonBasis FiniteComplex::boundaries(int n) const { return column_space(incoming(n)); }

HomologyData FiniteComplex::homology(int n) const {
    if (!has_homology(n)) throw std::out_of_range("homology unavailable at degree " + std::to_string(n));
    ComplexSlice before{n - step(dir_), {}, incoming(n)};
    ComplexSlice at{n, {}, differential(n)};
    ComplexSlice after{n + step(dir_), {}, Matrix(field_, 0, at.d_out.rows())};
    return fibalg::homology(before, at, after);
}

std::optional<int> FiniteComplex::d_squared_failure() const {
    for (int n = 0; n <= top(); ++n) {
        int next = n + step(dir_);
        if (next < 0 || next > top()) continue;
        if (!has_differential(n) || !has_differential(next)) continue;
        if (!(differential(next) * differential(n)).is_zero()) return n;
    }
    return std::nullopt;
}

// ------------------------------------------------------- graded maps

LinearMapPerDegree operator-(const LinearMapPerDegree& a, const LinearMapPerDegree& b) {
    if (a.shift != b.shift) throw std::invalid_argument("graded maps have different degree shifts");
    LinearMapPerDegree out{a.shift, {}};
    std::size_t n = std::min(a.maps.size(), b.maps.size());
    for (std::size_t i = 0; i < n; ++i) out.maps.push_back(a.maps[i] - b.maps[i]);
    return out;
}

LinearMapPerDegree compose(const LinearMapPerDegree& outer, const LinearMapPerDegree& inner) {
    LinearMapPerDegree out{outer.shift + inner.shift, {}};
    for (int n = 0; n <= inner.top(); ++n) {
        int mid = n + inner.shift;
        if (mid < 0) {
            out.maps.emplace_back(inner.at(n).field(), 0, inner.at(n).cols());
            continue;
        }
        if (mid > outer.top()) break;
        out.maps.push_back(outer.at(mid) * inner.at(n));
    }
    return out;
}

std::optional<int> chain_map_failure(const FiniteComplex& source, const FiniteComplex& target,
                                     const LinearMapPerDegree& f) {
    const int dir = step(source.direction());
    for (int n = 0; n <= f.top(); ++n) {
        int next = n + dir;
        if (next < 0) {
            // d_T f_n must vanish when it lands in target degree < 0; trivially true
            continue;
        }
        if (next > f.top() || !source.has_differential(n) || !target.has_differential(n + f.shift)) continue;
        if (n + f.shift + dir > target.top() || n + f.shift + dir < 0) continue;
        Matrix lhs = target.differential(n + f.shift) * f.at(n);
        Matrix rhs = f.at(next) * source.differential(n);
        if (!(lhs == rhs)) return n;
    }
    return std::nullopt;
}

bool induces_isomorphism(const FiniteComplex& source, const FiniteComplex& target,
                         const LinearMapPerDegree& f, int n) {
    HomologyData hs = source.homology(n);
    HomologyData ht = target.homology(n);
    if (hs.betti() != ht.betti()) return false;
    EchelonBasis classes(target.field(), ht.betti());
    for (const auto& rep : hs.representatives()) classes.insert(ht.class_of(f.at(n).apply(rep)));
    return classes.rank() == ht.betti();
}

// ------------------------------------------------------ TensorComplex

TensorComplex::TensorComplex(const FiniteComplex& a, const FiniteComplex& b, int top) : a_(a), b_(b) {
    if (a.direction() != b.direction()) throw std::invalid_argument("tensor of complexes with different directions");
    top = std::min({top, a.top(), b.top()});
    std::vector<std::size_t> dims;
    for (int n = 0; n <= top; ++n) {
        std::vector<std::size_t> offs;
        std::size_t total = 0;
        for (int i = 0; i <= n; ++i) {
            offs.push_back(total);
            total += a.dim(i) * b.dim(n - i);
        }
        offsets_.push_back(std::move(offs));
        dims.push_back(total);
    }
    complex_ = FiniteComplex(a.field(), a.direction(), dims);
    const PrimeField& f = a.field();
    const int dir = step(a.direction());
    for (int n = 0; n <= top; ++n) {
        int target = n + dir;
        if (target < 0 || target > top) continue;
        bool available = true;
        for (int i = 0; i <= n; ++i)
            if (!a.has_differential(i) || !b.has_differential(n - i)) available = false;
        if (!available) continue;
        std::vector<SparseVec> cols(dims[n]);
        for (int i = 0; i <= n; ++i) {
            int j = n - i;
            if (a.dim(i) == 0 || b.dim(j) == 0) continue;
            Matrix da = a.differential(i);
            Matrix db = b.differential(j);
            Residue sgn = f.sign(i);
            for (std::size_t x = 0; x < a.dim(i); ++x)
                for (std::size_t y = 0; y < b.dim(j); ++y) {
                    SparseVec col;
                    if (i + dir >= 0)
                        for (auto [k, v] : da.column(x)) col.emplace_back(index(i + dir, j, k, y), v);
                    if (j + dir >= 0)
                        for (auto [k, v] : db.column(y)) col.emplace_back(index(i, j + dir, x, k), f.mul(sgn, v));
                    std::sort(col.begin(), col.end());
                    cols[index(i, j, x, y)] = std::move(col);
                }
        }
        complex_.set_differential(n, Matrix::from_columns(f, dims[target], std::move(cols)));
    }
}

std::uint32_t TensorComplex::index(int i, int j, std::size_t a, std::size_t b) const {
    int n = i + j;
    return static_cast<std::uint32_t>(offsets_.at(n).at(i) + a * b_.dim(j) + b);
}

TensorComplex::Split TensorComplex::split(int n, std::uint32_t idx) const {
    const auto& offs = offsets_.at(n);
    int i = static_cast<int>(std::upper_bound(offs.begin(), offs.end(), static_cast<std::size_t>(idx)) - offs.begin()) - 1;
    std::size_t local = idx - offs[i];
    std::size_t bd = b_.dim(n - i);
    return {i, local / bd, local % bd};
}

LinearMapPerDegree swap_map(const TensorComplex& ab, const TensorComplex& ba) {
    const FiniteComplex& c = ab.complex();
    const PrimeField& f = c.field();
    LinearMapPerDegree out{0, {}};
    for (int n = 0; n <= std::min(c.top(), ba.complex().top()); ++n) {
        std::vector<SparseVec> cols(c.dim(n));
        for (std::uint32_t idx = 0; idx < c.dim(n); ++idx) {
            auto s = ab.split(n, idx);
            int j = n - s.left_degree;
            cols[idx] = {{ba.index(j, s.left_degree, s.right, s.left), f.sign(static_cast<long long>(s.left_degree) * j)}};
        }
        out.maps.push_back(Matrix::from_columns(f, ba.complex().dim(n), std::move(cols)));
    }
    return out;
}

LinearMapPerDegree tensor_maps(const TensorComplex& source, const TensorComplex& target,
                               const LinearMapPerDegree& f, const LinearMapPerDegree& g) {
    if (f.shift != 0 || g.shift != 0) throw std::invalid_argument("tensor_maps expects degree-0 maps");
    const FiniteComplex& s = source.complex();
    const PrimeField& fld = s.field();
    LinearMapPerDegree out{0, {}};
    for (int n = 0; n <= std::min(s.top(), target.complex().top()); ++n) {
        std::vector<SparseVec> cols(s.dim(n));
        for (std::uint32_t idx = 0; idx < s.dim(n); ++idx) {
            auto sp = source.split(n, idx);
            int i = sp.left_degree, j = n - i;
            SparseVec col;
            for (auto [x, u] : f.at(i).column(sp.left))
                for (auto [y, v] : g.at(j).column(sp.right)) col.emplace_back(target.index(i, j, x, y), fld.mul(u, v));
            std::sort(col.begin(), col.end());
            cols[idx] = std::move(col);
        }
        out.maps.push_back(Matrix::from_columns(fld, target.complex().dim(n), std::move(cols)));
    }
    return out;
}

LinearMapPerDegree identity_map(const FiniteComplex& c) {
    LinearMapPerDegree out{0, {}};
    for (int n = 0; n <= c.top(); ++n) out.maps.push_back(Matrix::identity(c.field(), c.dim(n)));
    return out;
}

LinearMapPerDegree associator(const TensorComplex& ab_c, const TensorComplex& ab,
                              const TensorComplex& a_bc, const TensorComplex& bc) {
    const FiniteComplex& s = ab_c.complex();
    LinearMapPerDegree out{0, {}};
    for (int n = 0; n <= std::min(s.top(), a_bc.complex().top()); ++n) {
        std::vector<SparseVec> cols(s.dim(n));
        for (std::uint32_t idx = 0; idx < s.dim(n); ++idx) {
            auto outer = ab_c.split(n, idx);
            int k = outer.left_degree;
            auto inner = ab.split(k, static_cast<std::uint32_t>(outer.left));
            int i = inner.left_degree, j = k - i, l = n - k;
            std::uint32_t bc_idx = bc.index(j, l, inner.right, outer.right);
            cols[idx] = {{a_bc.index(i, j + l, inner.left, bc_idx), 1}};
        }
        out.maps.push_back(Matrix::from_columns(s.field(), a_bc.complex().dim(n), std::move(cols)));
    }
    return out;
}

}  // namespace fibalg
