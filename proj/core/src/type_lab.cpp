#include "covpack/type_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

namespace covpack {

namespace {

double log2_factorial(std::int64_t k) {
  return std::lgamma(static_cast<double>(k) + 1.0) / std::numbers::ln2;
}

}  // namespace

Alphabet Alphabet::from_labels(std::vector<std::string> labels) {
  if (labels.empty()) throw std::invalid_argument("alphabet must be nonempty");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw std::invalid_argument("alphabet labels must be distinct");
  Alphabet a;
  a.labels_ = std::move(labels);
  return a;
}

Alphabet Alphabet::indexed(int size) {
  std::vector<std::string> labels;
  labels.reserve(size);
  for (int i = 0; i < size; ++i) labels.push_back(std::to_string(i));
  return from_labels(std::move(labels));
}

int Alphabet::index_of(const std::string& label) const {
  for (int i = 0; i < size(); ++i)
    if (labels_[i] == label) return i;
  throw std::invalid_argument("symbol not in alphabet: '" + label + "'");
}

TypeVector TypeVector::from_counts(std::vector<std::int64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("empty type vector");
  std::int64_t n = 0;
  for (std::int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("negative count in type vector");
    n += c;
  }
  if (n <= 0) throw std::invalid_argument("type vector block length must be positive");
  return TypeVector{std::move(counts), n};
}

std::string TypeVector::str() const {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) s += ':';
    s += std::to_string(counts[i]);
  }
  return s;
}

TypeVector type_of(std::span<const Symbol> seq, int alphabet_size) {
  std::vector<std::int64_t> counts(alphabet_size, 0);
  for (Symbol s : seq) {
    if (s < 0 || s >= alphabet_size)
      throw std::invalid_argument("symbol index out of range");
    ++counts[s];
  }
  return TypeVector::from_counts(std::move(counts));
}

JointType JointType::from_counts(std::vector<std::vector<std::int64_t>> counts) {
  if (counts.empty() || counts[0].empty())
    throw std::invalid_argument("empty joint type");
  const std::size_t cols = counts[0].size();
  std::int64_t n = 0;
  for (const auto& row : counts) {
    if (row.size() != cols) throw std::invalid_argument("ragged joint type");
    for (std::int64_t c : row) {
      if (c < 0) throw std::invalid_argument("negative joint count");
      n += c;
    }
  }
  if (n <= 0) throw std::invalid_argument("joint type block length must be positive");
  return JointType{std::move(counts), n};
}

TypeVector JointType::row_margin() const {
  std::vector<std::int64_t> m(counts.size(), 0);
  for (std::size_t x = 0; x < counts.size(); ++x)
    m[x] = std::accumulate(counts[x].begin(), counts[x].end(), std::int64_t{0});
  return TypeVector::from_counts(std::move(m));
}

TypeVector JointType::col_margin() const {
  std::vector<std::int64_t> m(counts[0].size(), 0);
  for (const auto& row : counts)
    for (std::size_t y = 0; y < row.size(); ++y) m[y] += row[y];
  return TypeVector::from_counts(std::move(m));
}

JointType joint_type_of(std::span<const Symbol> x, std::span<const Symbol> y,
                        int x_size, int y_size) {
  if (x.size() != y.size())
    throw std::invalid_argument("joint type of blocks with different lengths");
  std::vector<std::vector<std::int64_t>> counts(
      x_size, std::vector<std::int64_t>(y_size, 0));
  for (std::size_t i = 0; i < x.size(); ++i) ++counts.at(x[i]).at(y[i]);
  return JointType::from_counts(std::move(counts));
}

Permutation Permutation::identity(std::int64_t n) {
  std::vector<std::int32_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  return from_mapping(std::move(m));
}

Permutation Permutation::from_mapping(std::vector<std::int32_t> mapping) {
  std::vector<bool> seen(mapping.size(), false);
  for (std::int32_t v : mapping) {
    if (v < 0 || static_cast<std::size_t>(v) >= mapping.size() || seen[v])
      throw std::invalid_argument("mapping is not a bijection");
    seen[v] = true;
  }
  Permutation p;
  p.map_ = std::move(mapping);
  return p;
}

Permutation Permutation::random(std::int64_t n, RngStream& rng) {
  std::vector<std::int32_t> m(n);
  std::iota(m.begin(), m.end(), 0);
  rng.shuffle(m);
  return from_mapping(std::move(m));
}

Sequence apply_permutation(const Permutation& perm, std::span<const Symbol> seq) {
  if (perm.size() != static_cast<std::int64_t>(seq.size()))
    throw std::invalid_argument("permutation length mismatch");
  Sequence out(seq.size());
  for (std::int64_t i = 0; i < perm.size(); ++i) out[i] = seq[perm(i)];
  return out;
}

std::int64_t lattice_constant(const std::vector<Rational>& probs) {
  if (probs.empty()) throw std::invalid_argument("empty pmf");
  Rational sum(0);
  BigInt lcm(1);
  for (const Rational& p : probs) {
    if (sgn(p) < 0) throw std::invalid_argument("pmf entries must be nonnegative");
    Rational c = p;
    c.canonicalize();
    sum += c;
    mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), c.get_den().get_mpz_t());
  }
  if (sum != 1) throw std::invalid_argument("pmf must sum to exactly 1");
  if (!lcm.fits_slong_p())
    throw std::invalid_argument("lattice constant does not fit in 64 bits");
  return lcm.get_si();
}

RationalPmf RationalPmf::from_probs(std::vector<Rational> probs) {
  RationalPmf pmf;
  pmf.n0_ = lattice_constant(probs);
  for (auto& p : probs) p.canonicalize();
  pmf.probs_ = std::move(probs);
  return pmf;
}

TypeVector RationalPmf::type_at(std::int64_t n) const {
  if (n <= 0 || n % n0_ != 0)
    throw std::invalid_argument(
        "block length " + std::to_string(n) +
        " is not a multiple of the lattice constant " + std::to_string(n0_));
  std::vector<std::int64_t> counts;
  counts.reserve(probs_.size());
  for (const Rational& p : probs_) {
    Rational scaled = p * n;
    scaled.canonicalize();
    counts.push_back(BigInt(scaled.get_num()).get_si());
  }
  return TypeVector::from_counts(std::move(counts));
}

std::vector<double> RationalPmf::probs_double() const {
  std::vector<double> out;
  out.reserve(probs_.size());
  for (const auto& p : probs_) out.push_back(p.get_d());
  return out;
}

BigInt type_class_size(const TypeVector& t) {
  // Running product of binomials: multinomial(n; counts).
  BigInt result(1), part(0);
  std::int64_t used = 0;
  for (std::int64_t c : t.counts) {
    used += c;
    mpz_bin_uiui(part.get_mpz_t(), static_cast<unsigned long>(used),
                 static_cast<unsigned long>(c));
    result *= part;
  }
  return result;
}

double log2_type_class_size(const TypeVector& t) {
  double v = log2_factorial(t.n);
  for (std::int64_t c : t.counts) v -= log2_factorial(c);
  return v;
}

BigInt pairs_with_joint_type(const JointType& j) {
  BigInt result(1), part(0);
  std::int64_t used = 0;
  for (const auto& row : j.counts) {
    for (std::int64_t c : row) {
      used += c;
      mpz_bin_uiui(part.get_mpz_t(), static_cast<unsigned long>(used),
                   static_cast<unsigned long>(c));
      result *= part;
    }
  }
  return result;
}

double log2_pairs_with_joint_type(const JointType& j) {
  double v = log2_factorial(j.n);
  for (const auto& row : j.counts)
    for (std::int64_t c : row) v -= log2_factorial(c);
  return v;
}

BigInt count_types(int alphabet_size, std::int64_t n) {
  if (alphabet_size < 1 || n < 1)
    throw std::invalid_argument("count_types: need size >= 1 and n >= 1");
  BigInt r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n + alphabet_size - 1),
               static_cast<unsigned long>(alphabet_size - 1));
  return r;
}

namespace {

void enumerate_types_rec(int pos, int size, std::int64_t remaining,
                         std::vector<std::int64_t>& counts,
                         std::vector<TypeVector>& out) {
  if (pos == size - 1) {
    counts[pos] = remaining;
    out.push_back(TypeVector::from_counts(counts));
    return;
  }
  for (std::int64_t c = 0; c <= remaining; ++c) {
    counts[pos] = c;
    enumerate_types_rec(pos + 1, size, remaining - c, counts, out);
  }
}

}  // namespace

std::vector<TypeVector> enumerate_types(int alphabet_size, std::int64_t n,
                                        std::uint64_t budget) {
  const BigInt total = count_types(alphabet_size, n);
  if (total > budget)
    throw BudgetError("enumeration too large: " + total.get_str() +
                      " types exceeds budget " + std::to_string(budget));
  std::vector<TypeVector> out;
  out.reserve(total.get_ui());
  std::vector<std::int64_t> counts(alphabet_size, 0);
  enumerate_types_rec(0, alphabet_size, n, counts, out);
  return out;
}

namespace {

struct JointTypeEnumerator {
  const TypeVector& row;
  const TypeVector& col;
  std::uint64_t budget;
  const std::function<void(const JointType&)>& fn;

  std::vector<std::vector<std::int64_t>> m;
  std::vector<std::int64_t> col_rem;
  std::uint64_t visited = 0;

  void run() {
    const int rows = row.alphabet_size();
    const int cols = col.alphabet_size();
    m.assign(rows, std::vector<std::int64_t>(cols, 0));
    col_rem = col.counts;
    fill_row(0, 0, row.counts[0]);
  }

  void fill_row(int r, int c, std::int64_t row_rem) {
    const int rows = row.alphabet_size();
    const int cols = col.alphabet_size();
    if (c == cols) {
      if (row_rem != 0) return;  // unreachable: last cell is forced
      if (r + 1 == rows) {
        emit();
        return;
      }
      fill_row(r + 1, 0, row.counts[r + 1]);
      return;
    }
    // Suffix capacity bounds keep the recursion free of dead ends.
    std::int64_t suffix = 0;
    for (int c2 = c + 1; c2 < cols; ++c2) suffix += col_rem[c2];
    const std::int64_t lo = std::max<std::int64_t>(0, row_rem - suffix);
    const std::int64_t hi = std::min(row_rem, col_rem[c]);
    for (std::int64_t e = lo; e <= hi; ++e) {
      m[r][c] = e;
      col_rem[c] -= e;
      fill_row(r, c + 1, row_rem - e);
      col_rem[c] += e;
    }
    m[r][c] = 0;
  }

  void emit() {
    if (++visited > budget)
      throw BudgetError("joint-type enumeration exceeds budget " +
                        std::to_string(budget));
    fn(JointType{m, row.n});
  }
};

}  // namespace

std::uint64_t for_each_joint_type(const TypeVector& row, const TypeVector& col,
                                  std::uint64_t budget,
                                  const std::function<void(const JointType&)>& fn) {
  if (row.n != col.n)
    throw std::invalid_argument("joint-type margins have different block lengths");
  JointTypeEnumerator e{row, col, budget, fn, {}, {}, 0};
  e.run();
  return e.visited;
}

std::vector<JointType> enumerate_joint_types(const TypeVector& row,
                                             const TypeVector& col,
                                             std::uint64_t budget) {
  std::vector<JointType> out;
  for_each_joint_type(row, col, budget,
                      [&](const JointType& j) { out.push_back(j); });
  return out;
}

Sequence canonical_sequence(const TypeVector& t) {
  Sequence seq;
  seq.reserve(t.n);
  for (int s = 0; s < t.alphabet_size(); ++s)
    seq.insert(seq.end(), t.counts[s], static_cast<Symbol>(s));
  return seq;
}

Sequence sample_uniform(const TypeVector& t, RngStream& rng) {
  Sequence seq = canonical_sequence(t);
  rng.shuffle(seq);
  return seq;
}

std::uint64_t for_each_in_class(const TypeVector& t, std::uint64_t budget,
                                const std::function<void(const Sequence&)>& fn) {
  const BigInt size = type_class_size(t);
  if (size > budget)
    throw BudgetError("type class too large to enumerate: " + size.get_str() +
                      " exceeds budget " + std::to_string(budget));
  Sequence seq = canonical_sequence(t);
  std::uint64_t visited = 0;
  do {
    ++visited;
    fn(seq);
  } while (std::next_permutation(seq.begin(), seq.end()));
  return visited;
}

}  // namespace covpack
