#pragma once

#include <cstdint>
#include <compare>
#include <stdexcept>
#include <string>

namespace dlfit {

// Exact decimal scalar, stored as mantissa * 10^exponent with exponent <= 0.
// Normalized so that equal values have equal representation (no trailing
// zeros in the fractional part). Comparisons are performed in 128-bit
// intermediate precision and never go through floating point.
class Decimal {
public:
    Decimal() = default;

    Decimal(std::int64_t mantissa, int exponent) : mantissa_(mantissa), exponent_(exponent) {
        if (exponent_ > 0)
            throw std::invalid_argument("Decimal exponent must be <= 0");
        normalize();
    }

    static Decimal from_int(std::int64_t v) { return Decimal(v, 0); }

    // Parses decimal literals like "121", "-3.25", "1.50".
    static Decimal parse(const std::string& text) {
        if (text.empty())
            throw std::invalid_argument("empty decimal literal");
        std::size_t pos = 0;
        bool negative = false;
        if (text[pos] == '+' || text[pos] == '-') {
            negative = text[pos] == '-';
            ++pos;
        }
        std::int64_t mantissa = 0;
        int exponent = 0;
        bool seen_digit = false, seen_dot = false;
        for (; pos < text.size(); ++pos) {
            char c = text[pos];
            if (c == '.') {
                if (seen_dot)
                    throw std::invalid_argument("bad decimal literal: " + text);
                seen_dot = true;
            } else if (c >= '0' && c <= '9') {
                seen_digit = true;
                if (mantissa > (INT64_MAX - 9) / 10)
                    throw std::out_of_range("decimal literal too large: " + text);
                mantissa = mantissa * 10 + (c - '0');
                if (seen_dot)
                    --exponent;
            } else {
                throw std::invalid_argument("bad decimal literal: " + text);
            }
        }
        if (!seen_digit)
            throw std::invalid_argument("bad decimal literal: " + text);
        return Decimal(negative ? -mantissa : mantissa, exponent);
    }

    std::int64_t mantissa() const { return mantissa_; }
    int exponent() const { return exponent_; }

    friend bool operator==(const Decimal& a, const Decimal& b) {
        return a.mantissa_ == b.mantissa_ && a.exponent_ == b.exponent_;
    }

    friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
        // Align to the smaller exponent; 128-bit intermediates avoid overflow.
        int e = a.exponent_ < b.exponent_ ? a.exponent_ : b.exponent_;
        __int128 ma = scaled(a.mantissa_, a.exponent_ - e);
        __int128 mb = scaled(b.mantissa_, b.exponent_ - e);
        if (ma < mb) return std::strong_ordering::less;
        if (ma > mb) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const {
        std::string digits = std::to_string(mantissa_ < 0 ? -mantissa_ : mantissa_);
        int frac = -exponent_;
        std::string out;
        if (mantissa_ < 0)
            out += '-';
        if (frac == 0) {
            out += digits;
        } else {
            while ((int)digits.size() <= frac)
                digits.insert(digits.begin(), '0');
            out += digits.substr(0, digits.size() - frac);
            out += '.';
            out += digits.substr(digits.size() - frac);
        }
        return out;
    }

    std::size_t hash() const {
        return std::hash<std::int64_t>()(mantissa_) * 31 + std::hash<int>()(exponent_);
    }

private:
    static __int128 scaled(std::int64_t m, int shift) {
        __int128 v = m;
        for (int i = 0; i < shift; ++i)
            v *= 10;
        return v;
    }

    void normalize() {
        if (mantissa_ == 0) {
            exponent_ = 0;
            return;
        }
        while (exponent_ < 0 && mantissa_ % 10 == 0) {
            mantissa_ /= 10;
            ++exponent_;
        }
    }

    std::int64_t mantissa_ = 0;
    int exponent_ = 0;
};

}  // namespace dlfit
