#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace msdflow {

// Arbitrary-precision signed integer, sign + little-endian base-2^32 magnitude.
// Factorial ratios such as (2n-1)! and the entries of the combinatorial
// matrices overflow 64-bit already at moderate order, so every exact path in
// the library runs on this type.
class BigInt {
  public:
    BigInt() = default;
    BigInt(std::int64_t v);

    static BigInt from_string(const std::string& s);

    BigInt operator-() const;
    BigInt operator+(const BigInt& o) const;
    BigInt operator-(const BigInt& o) const;
    BigInt operator*(const BigInt& o) const;
    // Truncated quotient (rounds toward zero), matching C++ integer division.
    BigInt operator/(const BigInt& o) const;
    BigInt operator%(const BigInt& o) const;

    BigInt& operator+=(const BigInt& o) { return *this = *this + o; }
    BigInt& operator-=(const BigInt& o) { return *this = *this - o; }
    BigInt& operator*=(const BigInt& o) { return *this = *this * o; }

    bool operator==(const BigInt& o) const;
    bool operator!=(const BigInt& o) const { return !(*this == o); }
    bool operator<(const BigInt& o) const;
    bool operator>(const BigInt& o) const { return o < *this; }
    bool operator<=(const BigInt& o) const { return !(o < *this); }
    bool operator>=(const BigInt& o) const { return !(*this < o); }

    bool is_zero() const { return limbs_.empty(); }
    bool is_negative() const { return negative_; }
    int sign() const { return is_zero() ? 0 : (negative_ ? -1 : 1); }
    BigInt abs() const;

    // Exact double conversion with ldexp-style scaling; values beyond double
    // range saturate to +/-inf.
    double to_double() const;
    // Signed mantissa from the top limbs plus the base-2 exponent of the
    // dropped tail, so ratios of huge integers can still be formed in double.
    double to_double_with_exp(int& exp2_out) const;
    std::string to_string() const;

    std::size_t bit_length() const;

    static BigInt gcd(BigInt a, BigInt b);
    static BigInt factorial(unsigned k);
    static BigInt binomial(unsigned n, unsigned k);
    static BigInt pow(const BigInt& base, unsigned e);

  private:
    bool negative_ = false;
    std::vector<std::uint32_t> limbs_;  // little-endian, no leading zeros

    void trim();
    static int cmp_mag(const BigInt& a, const BigInt& b);
    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    static void divmod(const BigInt& num, const BigInt& den, BigInt& quot, BigInt& rem);
};

// Exact rational number, always stored in lowest terms with positive
// denominator.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(std::int64_t v) : num_(v), den_(1) {}
    Rational(BigInt num, BigInt den);
    Rational(std::int64_t num, std::int64_t den) : Rational(BigInt(num), BigInt(den)) {}

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    Rational operator-() const;
    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    Rational operator*(const Rational& o) const;
    Rational operator/(const Rational& o) const;

    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const;

    bool is_zero() const { return num_.is_zero(); }
    int sign() const { return num_.sign(); }

    // t^e for possibly negative exponent; throws on 0^negative.
    static Rational pow(const Rational& base, int e);

    double to_double() const;
    std::string to_string() const;

  private:
    BigInt num_;
    BigInt den_;  // > 0
    void normalize();
};

}  // namespace msdflow
