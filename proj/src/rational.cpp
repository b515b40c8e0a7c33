#include "msdflow/rational.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace msdflow {

BigInt::BigInt(std::int64_t v) {
    negative_ = v < 0;
    std::uint64_t m = negative_ ? (~static_cast<std::uint64_t>(v) + 1) : static_cast<std::uint64_t>(v);
    while (m) {
        limbs_.push_back(static_cast<std::uint32_t>(m & 0xffffffffu));
        m >>= 32;
    }
}

BigInt BigInt::from_string(const std::string& s) {
    BigInt r;
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    if (i == s.size()) throw std::invalid_argument("BigInt: empty literal");
    for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
        r = r * BigInt(10) + BigInt(s[i] - '0');
    }
    r.negative_ = neg && !r.is_zero();
    return r;
}

void BigInt::trim() {
    while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    if (limbs_.empty()) negative_ = false;
}

int BigInt::cmp_mag(const BigInt& a, const BigInt& b) {
    if (a.limbs_.size() != b.limbs_.size()) return a.limbs_.size() < b.limbs_.size() ? -1 : 1;
    for (std::size_t i = a.limbs_.size(); i-- > 0;) {
        if (a.limbs_[i] != b.limbs_[i]) return a.limbs_[i] < b.limbs_[i] ? -1 : 1;
    }
    return 0;
}

std::vector<std::uint32_t> BigInt::add_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> r;
    r.reserve(std::max(a.size(), b.size()) + 1);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < std::max(a.size(), b.size()) || carry; ++i) {
        std::uint64_t s = carry;
        if (i < a.size()) s += a[i];
        if (i < b.size()) s += b[i];
        r.push_back(static_cast<std::uint32_t>(s & 0xffffffffu));
        carry = s >> 32;
    }
    return r;
}

// requires |a| >= |b|
std::vector<std::uint32_t> BigInt::sub_mag(const std::vector<std::uint32_t>& a,
                                           const std::vector<std::uint32_t>& b) {
    std::vector<std::uint32_t> r(a.size());
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::int64_t s = static_cast<std::int64_t>(a[i]) - borrow - (i < b.size() ? b[i] : 0);
        borrow = 0;
        if (s < 0) {
            s += (1ll << 32);
            borrow = 1;
        }
        r[i] = static_cast<std::uint32_t>(s);
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

BigInt BigInt::operator-() const {
    BigInt r = *this;
    if (!r.is_zero()) r.negative_ = !r.negative_;
    return r;
}

BigInt BigInt::abs() const {
    BigInt r = *this;
    r.negative_ = false;
    return r;
}

BigInt BigInt::operator+(const BigInt& o) const {
    BigInt r;
    if (negative_ == o.negative_) {
        r.limbs_ = add_mag(limbs_, o.limbs_);
        r.negative_ = negative_;
    } else {
        int c = cmp_mag(*this, o);
        if (c == 0) return BigInt();
        if (c > 0) {
            r.limbs_ = sub_mag(limbs_, o.limbs_);
            r.negative_ = negative_;
        } else {
            r.limbs_ = sub_mag(o.limbs_, limbs_);
            r.negative_ = o.negative_;
        }
    }
    r.trim();
    return r;
}

BigInt BigInt::operator-(const BigInt& o) const { return *this + (-o); }

BigInt BigInt::operator*(const BigInt& o) const {
    if (is_zero() || o.is_zero()) return BigInt();
    BigInt r;
    r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
            std::uint64_t cur = static_cast<std::uint64_t>(limbs_[i]) * o.limbs_[j] +
                                r.limbs_[i + j] + carry;
            r.limbs_[i + j] = static_cast<std::uint32_t>(cur & 0xffffffffu);
            carry = cur >> 32;
        }
        std::size_t k = i + o.limbs_.size();
        while (carry) {
            std::uint64_t cur = r.limbs_[k] + carry;
            r.limbs_[k] = static_cast<std::uint32_t>(cur & 0xffffffffu);
            carry = cur >> 32;
            ++k;
        }
    }
    r.negative_ = negative_ != o.negative_;
    r.trim();
    return r;
}

std::size_t BigInt::bit_length() const {
    if (limbs_.empty()) return 0;
    std::uint32_t top = limbs_.back();
    std::size_t bits = (limbs_.size() - 1) * 32;
    while (top) {
        ++bits;
        top >>= 1;
    }
    return bits;
}

// Shift-and-subtract long division on magnitudes; adequate for the matrix
// orders this library works at.
void BigInt::divmod(const BigInt& num, const BigInt& den, BigInt& quot, BigInt& rem) {
    if (den.is_zero()) throw std::domain_error("BigInt: division by zero");
    BigInt n = num.abs(), d = den.abs();
    if (cmp_mag(n, d) < 0) {
        quot = BigInt();
        rem = num;
        return;
    }
    std::size_t shift = n.bit_length() - d.bit_length();
    // d << shift
    auto shl = [](const BigInt& a, std::size_t k) {
        BigInt r;
        std::size_t limb_shift = k / 32, bit_shift = k % 32;
        r.limbs_.assign(a.limbs_.size() + limb_shift + 1, 0);
        for (std::size_t i = 0; i < a.limbs_.size(); ++i) {
            std::uint64_t v = static_cast<std::uint64_t>(a.limbs_[i]) << bit_shift;
            r.limbs_[i + limb_shift] |= static_cast<std::uint32_t>(v & 0xffffffffu);
            r.limbs_[i + limb_shift + 1] |= static_cast<std::uint32_t>(v >> 32);
        }
        r.trim();
        return r;
    };
    BigInt cur = shl(d, shift);
    BigInt q;
    q.limbs_.assign(shift / 32 + 1, 0);
    BigInt r = n;
    for (std::size_t i = shift + 1; i-- > 0;) {
        if (cmp_mag(r, cur) >= 0) {
            r.limbs_ = sub_mag(r.limbs_, cur.limbs_);
            r.trim();
            q.limbs_[i / 32] |= (1u << (i % 32));
        }
        // cur >>= 1
        std::uint32_t carry = 0;
        for (std::size_t k = cur.limbs_.size(); k-- > 0;) {
            std::uint32_t next = cur.limbs_[k] & 1u;
            cur.limbs_[k] = (cur.limbs_[k] >> 1) | (carry << 31);
            carry = next;
        }
        cur.trim();
    }
    q.trim();
    q.negative_ = !q.is_zero() && (num.negative_ != den.negative_);
    r.negative_ = !r.is_zero() && num.negative_;
    quot = q;
    rem = r;
}

BigInt BigInt::operator/(const BigInt& o) const {
    BigInt q, r;
    divmod(*this, o, q, r);
    return q;
}

BigInt BigInt::operator%(const BigInt& o) const {
    BigInt q, r;
    divmod(*this, o, q, r);
    return r;
}

bool BigInt::operator==(const BigInt& o) const {
    return negative_ == o.negative_ && limbs_ == o.limbs_;
}

bool BigInt::operator<(const BigInt& o) const {
    if (negative_ != o.negative_) return negative_;
    int c = cmp_mag(*this, o);
    return negative_ ? c > 0 : c < 0;
}

double BigInt::to_double_with_exp(int& exp2_out) const {
    exp2_out = 0;
    if (limbs_.empty()) return 0.0;
    std::size_t take = limbs_.size() < 3 ? limbs_.size() : 3;
    double mant = 0.0;
    for (std::size_t i = limbs_.size(); i-- > limbs_.size() - take;)
        mant = mant * 4294967296.0 + static_cast<double>(limbs_[i]);
    exp2_out = static_cast<int>(32 * (limbs_.size() - take));
    return negative_ ? -mant : mant;
}

double BigInt::to_double() const {
    int e = 0;
    double m = to_double_with_exp(e);
    return std::ldexp(m, e);
}

std::string BigInt::to_string() const {
    if (is_zero()) return "0";
    BigInt n = abs();
    std::string digits;
    BigInt ten(10);
    while (!n.is_zero()) {
        BigInt q, r;
        divmod(n, ten, q, r);
        digits.push_back(static_cast<char>('0' + (r.is_zero() ? 0 : r.limbs_[0])));
        n = q;
    }
    if (negative_) digits.push_back('-');
    return std::string(digits.rbegin(), digits.rend());
}

BigInt BigInt::gcd(BigInt a, BigInt b) {
    a = a.abs();
    b = b.abs();
    while (!b.is_zero()) {
        BigInt r = a % b;
        a = b;
        b = r;
    }
    return a;
}

BigInt BigInt::factorial(unsigned k) {
    BigInt r(1);
    for (unsigned i = 2; i <= k; ++i) r *= BigInt(static_cast<std::int64_t>(i));
    return r;
}

BigInt BigInt::binomial(unsigned n, unsigned k) {
    if (k > n) return BigInt(0);
    if (k > n - k) k = n - k;
    BigInt r(1);
    for (unsigned i = 1; i <= k; ++i) {
        r *= BigInt(static_cast<std::int64_t>(n - k + i));
        r = r / BigInt(static_cast<std::int64_t>(i));
    }
    return r;
}

BigInt BigInt::pow(const BigInt& base, unsigned e) {
    BigInt r(1), b = base;
    while (e) {
        if (e & 1u) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
    if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
    normalize();
}

void Rational::normalize() {
    if (den_.is_negative()) {
        num_ = -num_;
        den_ = -den_;
    }
    if (num_.is_zero()) {
        den_ = BigInt(1);
        return;
    }
    BigInt g = BigInt::gcd(num_, den_);
    num_ = num_ / g;
    den_ = den_ / g;
}

Rational Rational::operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(num_ * o.den_ + o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
    return Rational(num_ * o.den_ - o.num_ * den_, den_ * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
    return Rational(num_ * o.num_, den_ * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
    if (o.num_.is_zero()) throw std::domain_error("Rational: division by zero");
    return Rational(num_ * o.den_, den_ * o.num_);
}

bool Rational::operator<(const Rational& o) const {
    return num_ * o.den_ < o.num_ * den_;
}

Rational Rational::pow(const Rational& base, int e) {
    if (e == 0) return Rational(1);
    if (e > 0) return Rational(BigInt::pow(base.num(), static_cast<unsigned>(e)),
                               BigInt::pow(base.den(), static_cast<unsigned>(e)));
    if (base.is_zero()) throw std::domain_error("Rational: 0 to negative power");
    return Rational(BigInt::pow(base.den(), static_cast<unsigned>(-e)),
                    BigInt::pow(base.num(), static_cast<unsigned>(-e)));
}

double Rational::to_double() const {
    if (num_.is_zero()) return 0.0;
    int en = 0, ed = 0;
    double mn = num_.to_double_with_exp(en);
    double md = den_.to_double_with_exp(ed);
    return std::ldexp(mn / md, en - ed);
}

std::string Rational::to_string() const {
    if (den_ == BigInt(1)) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
}

}  // namespace msdflow
