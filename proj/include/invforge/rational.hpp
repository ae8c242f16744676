#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "invforge/error.hpp"

namespace invforge {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational make_rational(const BigInt& p, const BigInt& q) { return Rational(p, q); }

// "p/q" or "p"; whitespace is not accepted.
inline Rational parse_rational(const std::string& s) {
    if (s.empty()) throw Error(ErrorKind::ParseError, "empty rational");
    auto slash = s.find('/');
    auto check_int = [&](const std::string& t, bool allow_sign) {
        if (t.empty()) throw Error(ErrorKind::ParseError, "bad rational '" + s + "'");
        std::size_t i = 0;
        if (allow_sign && t[0] == '-') i = 1;
        if (i == t.size()) throw Error(ErrorKind::ParseError, "bad rational '" + s + "'");
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') throw Error(ErrorKind::ParseError, "bad rational '" + s + "'");
    };
    if (slash == std::string::npos) {
        check_int(s, true);
        return Rational(BigInt(s));
    }
    std::string p = s.substr(0, slash), q = s.substr(slash + 1);
    check_int(p, true);
    check_int(q, false);
    BigInt qq(q);
    if (qq == 0) throw Error(ErrorKind::ParseError, "zero denominator in '" + s + "'");
    return Rational(BigInt(p), qq);
}

inline std::string to_string(const Rational& r) {
    BigInt p = boost::multiprecision::numerator(r), q = boost::multiprecision::denominator(r);
    if (q == 1) return p.str();
    return p.str() + "/" + q.str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational pow2(int e) {
    BigInt one = 1;
    if (e >= 0) return Rational(one << e);
    return Rational(BigInt(1), one << (-e));
}

}  // namespace invforge
