#include "permlim/perm.hpp"
#include "permlim/rational.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace permlim {

Perm::Perm(std::vector<int> images) : images_(std::move(images))
{
    const int n = size();
    if (n < 1) throw std::invalid_argument("permutation must have length >= 1");
    std::vector<int> count(static_cast<std::size_t>(n) + 1, 0);
    std::string problem;
    for (int v : images_) {
        if (v < 1 || v > n) {
            if (problem.empty())
                problem = "value " + std::to_string(v) + " is out of range 1.." + std::to_string(n);
        } else if (++count[static_cast<std::size_t>(v)] == 2 && problem.empty()) {
            problem = "value " + std::to_string(v) + " is duplicated";
        }
    }
    if (problem.empty()) return;
    for (int v = 1; v <= n; ++v)
        if (count[static_cast<std::size_t>(v)] == 0) {
            problem += "; value " + std::to_string(v) + " is missing";
            break;
        }
    throw std::invalid_argument("not a permutation: " + problem);
}

Perm Perm::identity(int n)
{
    if (n < 1) throw std::invalid_argument("permutation must have length >= 1");
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    return Perm{std::move(v), Unchecked{}};
}

Perm Perm::unrank(int k, std::uint64_t rank)
{
    if (k < 1 || k > 20) throw std::invalid_argument("unrank: k out of range");
    if (rank >= factorial(k)) throw std::invalid_argument("unrank: rank out of range");
    std::vector<int> pool(static_cast<std::size_t>(k));
    std::iota(pool.begin(), pool.end(), 1);
    std::vector<int> out;
    out.reserve(pool.size());
    for (int i = k; i >= 1; --i) {
        const std::uint64_t f = factorial(i - 1);
        const auto idx = static_cast<std::ptrdiff_t>(rank / f);
        rank %= f;
        out.push_back(pool[static_cast<std::size_t>(idx)]);
        pool.erase(pool.begin() + idx);
    }
    return Perm{std::move(out), Unchecked{}};
}

std::uint64_t Perm::lex_rank() const
{
    // Lehmer code; sizes used here are small.
    const int n = size();
    std::uint64_t rank = 0;
    for (int i = 0; i < n; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < n; ++j)
            if (images_[static_cast<std::size_t>(j)] < images_[static_cast<std::size_t>(i)]) ++smaller;
        rank = rank * static_cast<std::uint64_t>(n - i) + static_cast<std::uint64_t>(smaller);
    }
    return rank;
}

Perm Perm::reverse() const
{
    std::vector<int> v(images_.rbegin(), images_.rend());
    return Perm{std::move(v), Unchecked{}};
}

Perm Perm::complement() const
{
    const int n = size();
    std::vector<int> v(images_.size());
    std::transform(images_.begin(), images_.end(), v.begin(), [n](int x) { return n + 1 - x; });
    return Perm{std::move(v), Unchecked{}};
}

Perm Perm::inverse() const
{
    std::vector<int> v(images_.size());
    for (int i = 0; i < size(); ++i) v[static_cast<std::size_t>(images_[static_cast<std::size_t>(i)] - 1)] = i + 1;
    return Perm{std::move(v), Unchecked{}};
}

std::string Perm::str(char sep) const
{
    std::string s;
    for (std::size_t i = 0; i < images_.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(images_[i]);
    }
    return s;
}

std::ostream& operator<<(std::ostream& os, const Perm& p) { return os << '(' << p.str() << ')'; }

Reflections reflections(const Perm& tau) { return {tau.reverse(), tau.complement(), tau.inverse()}; }

namespace {

template <typename T>
Perm pattern_impl(std::span<const T> keys)
{
    const std::size_t k = keys.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    std::vector<int> ranks(k);
    for (std::size_t r = 0; r < k; ++r) {
        if (r > 0 && !(keys[order[r - 1]] < keys[order[r]]))
            throw std::invalid_argument("pattern_of: keys must be distinct");
        ranks[order[r]] = static_cast<int>(r) + 1;
    }
    return Perm{std::move(ranks)};
}

}  // namespace

Perm pattern_of(std::span<const double> keys) { return pattern_impl(keys); }
Perm pattern_of(std::span<const int> keys) { return pattern_impl(keys); }

Perm induce(const Perm& tau, std::span<const int> positions)
{
    if (positions.empty()) throw std::invalid_argument("induce: empty index set");
    std::vector<int> vals;
    vals.reserve(positions.size());
    int prev = 0;
    for (int p : positions) {
        if (p <= prev || p > tau.size())
            throw std::invalid_argument("induce: indices must be strictly increasing within 1.." +
                                        std::to_string(tau.size()));
        vals.push_back(tau.value(p));
        prev = p;
    }
    return pattern_of(std::span<const int>(vals));
}

std::vector<Perm> all_perms(int k)
{
    std::vector<Perm> out;
    std::vector<int> v(static_cast<std::size_t>(k));
    std::iota(v.begin(), v.end(), 1);
    do {
        out.emplace_back(v);
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
}

Perm parse_perm(std::string_view text)
{
    std::vector<int> values;
    std::istringstream in{std::string(text)};
    std::string line;
    bool have_line = false;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        if (have_line) throw std::invalid_argument("permutation text must contain a single line");
        have_line = true;
        for (char& c : line)
            if (c == ',' || c == '\t' || c == '\r') c = ' ';
        std::istringstream tokens(line);
        std::string tok;
        while (tokens >> tok) {
            int v = 0;
            auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc{} || ptr != tok.data() + tok.size() || v < 1)
                throw std::invalid_argument("not a positive integer: '" + tok + "'");
            values.push_back(v);
        }
    }
    if (values.empty()) throw std::invalid_argument("no permutation found");
    return Perm{std::move(values)};
}

Perm read_perm_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open permutation file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_perm(buf.str());
}

Rational parse_rational(std::string_view text)
{
    std::string s(text);
    if (s.empty()) throw std::invalid_argument("empty rational");
    try {
        const auto dot = s.find('.');
        const auto exp = s.find_first_of("eE");
        if (exp != std::string::npos) throw std::invalid_argument("exponent notation not supported");
        if (dot != std::string::npos) {
            std::string digits = s.substr(0, dot) + s.substr(dot + 1);
            const std::size_t places = s.size() - dot - 1;
            if (digits.empty() || digits == "-" || digits == "+")
                throw std::invalid_argument("malformed decimal");
            if (digits[0] == '+') digits.erase(0, 1);
            Rational r{BigInt{digits}, BigInt{"1" + std::string(places, '0')}};
            r.canonicalize();
            return r;
        }
        if (s[0] == '+') s.erase(0, 1);
        Rational r{s};
        if (r.get_den() == 0) throw std::invalid_argument("zero denominator");
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("not a rational number: '" + std::string(text) + "'");
    }
}

}  // namespace permlim
