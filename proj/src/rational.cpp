#include "mcs/rational.hpp"

#include <algorithm>
#include <stdexcept>

namespace mcs {

namespace {

Integer int64_to_mpz(std::int64_t v)
{
    Integer z;
    mpz_set_si(z.get_mpz_t(), static_cast<long>(v));
    return z;
}

bool all_digits(std::string_view s)
{
    if (s.empty())
        return false;
    for (char c : s)
        if (c < '0' || c > '9')
            return false;
    return true;
}

}  // namespace

Rational make_rational(std::int64_t num, std::int64_t den)
{
    if (den == 0)
        throw std::domain_error("rational with zero denominator");
    Rational r(int64_to_mpz(num), int64_to_mpz(den));
    r.canonicalize();
    return r;
}

Rational parse_rational(std::string_view text)
{
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);

    bool negative = false;
    std::string_view body = s;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }

    Rational result;
    if (auto slash = body.find('/'); slash != std::string_view::npos) {
        auto num = body.substr(0, slash);
        auto den = body.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den))
            throw std::invalid_argument("malformed rational: " + std::string(text));
        Integer n(std::string(num), 10);
        Integer d(std::string(den), 10);
        if (d == 0)
            throw std::invalid_argument("zero denominator: " + std::string(text));
        result = Rational(n, d);
        result.canonicalize();
    } else if (auto dot = body.find('.'); dot != std::string_view::npos) {
        auto whole = body.substr(0, dot);
        auto frac = body.substr(dot + 1);
        if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac))
            || (whole.empty() && frac.empty()))
            throw std::invalid_argument("malformed decimal: " + std::string(text));
        Integer digits(std::string(whole) + std::string(frac), 10);
        Integer scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
        result = Rational(digits, scale);
        result.canonicalize();
    } else {
        if (!all_digits(body))
            throw std::invalid_argument("malformed rational: " + std::string(text));
        result = Rational(Integer(std::string(body), 10));
    }
    return negative ? Rational(-result) : result;
}

std::string to_string(const Rational& r)
{
    if (r.get_den() == 1)
        return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string to_decimal_string(const Rational& r)
{
    Integer den = r.get_den();
    int twos = 0, fives = 0;
    while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
        den /= 2;
        ++twos;
    }
    while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
        den /= 5;
        ++fives;
    }
    if (den != 1)
        return to_string(r);

    const int places = std::max(twos, fives);
    if (places == 0)
        return r.get_num().get_str();

    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(places));
    Integer scaled = r.get_num() * scale / r.get_den();
    const bool negative = scaled < 0;
    if (negative)
        scaled = -scaled;
    std::string digits = scaled.get_str();
    if (digits.size() <= static_cast<std::size_t>(places))
        digits.insert(0, static_cast<std::size_t>(places) - digits.size() + 1, '0');
    digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    return negative ? "-" + digits : digits;
}

Integer floor_of(const Rational& r)
{
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

Integer ceil_of(const Rational& r)
{
    Integer q;
    mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return q;
}

bool fits_int64(const Integer& z)
{
    return mpz_fits_slong_p(z.get_mpz_t()) != 0;
}

std::int64_t to_int64(const Integer& z)
{
    if (!fits_int64(z))
        throw std::overflow_error("integer does not fit in 64 bits: " + z.get_str());
    return static_cast<std::int64_t>(mpz_get_si(z.get_mpz_t()));
}

double to_double(const Rational& r)
{
    return r.get_d();
}

}  // namespace mcs
