#include "covpack/exact.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>

namespace covpack {

namespace {

std::string strip(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_integer_token(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  const std::string t = strip(text);
  const auto slash = t.find('/');
  std::string num = strip(slash == std::string::npos ? t : t.substr(0, slash));
  std::string den = slash == std::string::npos ? "1" : strip(t.substr(slash + 1));
  if (!is_integer_token(num) || !is_integer_token(den))
    throw ConfigError("not a rational: '" + text + "'");
  Rational r(num + "/" + den);
  if (r.get_den() == 0) throw ConfigError("zero denominator: '" + text + "'");
  r.canonicalize();
  return r;
}

std::string format_rational(const Rational& r) {
  Rational c = r;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

double log2_bigint(const BigInt& v) {
  if (sgn(v) < 0) throw std::domain_error("log2 of negative integer");
  if (sgn(v) == 0) return kNegInf;
  signed long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, v.get_mpz_t());
  return std::log2(mant) + static_cast<double>(exp);
}

double log2_rational(const Rational& r) {
  if (sgn(r) < 0) throw std::domain_error("log2 of negative rational");
  if (sgn(r) == 0) return kNegInf;
  return log2_bigint(BigInt(r.get_num())) - log2_bigint(BigInt(r.get_den()));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

LogProb LogProb::from_linear(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("probability out of [0,1]");
  return LogProb{p == 0.0 ? kNegInf : std::log2(p)};
}

double LogProb::to_linear() const {
  return log2_value == kNegInf ? 0.0 : std::exp2(log2_value);
}

void Log2Sum::add_log2(double term) {
  if (term == kNegInf) return;
  if (empty_) {
    max_ = term;
    scaled_sum_ = 1.0;
    empty_ = false;
    return;
  }
  if (term <= max_) {
    scaled_sum_ += std::exp2(term - max_);
  } else {
    scaled_sum_ = scaled_sum_ * std::exp2(max_ - term) + 1.0;
    max_ = term;
  }
}

double Log2Sum::value() const {
  if (empty_) return kNegInf;
  return max_ + std::log2(scaled_sum_);
}

ArithMode parse_arith_mode(const std::string& name) {
  if (name == "exact") return ArithMode::exact;
  if (name == "log") return ArithMode::log;
  if (name == "auto") return ArithMode::auto_select;
  throw ConfigError("unknown arithmetic mode: '" + name + "'");
}

std::string arith_mode_name(ArithMode m) {
  switch (m) {
    case ArithMode::exact: return "exact";
    case ArithMode::log: return "log";
    case ArithMode::auto_select: return "auto";
  }
  return "auto";
}

Prob Prob::from_rational(Rational r) {
  r.canonicalize();
  if (sgn(r) < 0 || r > 1) throw std::domain_error("probability out of [0,1]");
  Prob p;
  p.exact_ = true;
  p.rational_ = std::move(r);
  return p;
}

Prob Prob::from_log2(double log2_value) {
  if (log2_value > 1e-9) throw std::domain_error("log2 probability > 0");
  Prob p;
  p.exact_ = false;
  p.log2_ = std::min(log2_value, 0.0);
  return p;
}

Prob Prob::zero(bool exact) {
  return exact ? from_rational(Rational(0)) : from_log2(kNegInf);
}

Prob Prob::one(bool exact) {
  return exact ? from_rational(Rational(1)) : from_log2(0.0);
}

bool Prob::is_zero() const {
  return exact_ ? sgn(rational_) == 0 : log2_ == kNegInf;
}

bool Prob::is_one() const {
  return exact_ ? rational_ == 1 : log2_ == 0.0;
}

const Rational& Prob::rational() const {
  if (!exact_) throw std::logic_error("log-domain Prob has no exact value");
  return rational_;
}

double Prob::log2() const { return exact_ ? log2_rational(rational_) : log2_; }

double Prob::to_double() const {
  return exact_ ? rational_.get_d() : std::exp2(log2_);
}

Prob Prob::pow(const BigInt& exponent, const ArithPolicy& policy) const {
  if (sgn(exponent) < 0) throw std::domain_error("negative codebook exponent");
  if (sgn(exponent) == 0) return one(exact_);
  if (is_one()) return one(exact_);
  if (is_zero()) return zero(exact_);
  if (exact_ && exponent <= policy.exact_pow_limit) {
    const unsigned long e = exponent.get_ui();
    Rational out;
    mpz_pow_ui(out.get_num_mpz_t(), rational_.get_num_mpz_t(), e);
    mpz_pow_ui(out.get_den_mpz_t(), rational_.get_den_mpz_t(), e);
    out.canonicalize();
    return from_rational(out);
  }
  const double k = mpz_get_d(exponent.get_mpz_t());
  return from_log2(k * log2());
}

Prob Prob::complement() const {
  if (!exact_)
    throw std::logic_error("complement requires an exact probability");
  return from_rational(Rational(1) - rational_);
}

std::string Prob::str() const {
  return exact_ ? format_rational(rational_) : format_double(to_double());
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

}  // namespace covpack
