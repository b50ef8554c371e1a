#ifndef PERMLIM_PERM_HPP
#define PERMLIM_PERM_HPP

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace permlim {

/**
 * A permutation of [n] = {1,...,n} in one-line notation.
 *
 * Values and positions are 1-indexed at the interface: value(i) is the image
 * of position i. The images are validated to be a bijection on construction.
 */
class Perm {
public:
    /// Throws std::invalid_argument naming a duplicated or missing value.
    explicit Perm(std::vector<int> images);
    Perm(std::initializer_list<int> images) : Perm(std::vector<int>(images)) {}

    static Perm identity(int n);

    /// The permutation of S_k with lexicographic rank `rank` (0-based).
    static Perm unrank(int k, std::uint64_t rank);

    int size() const { return static_cast<int>(images_.size()); }
    int value(int position) const { return images_[static_cast<std::size_t>(position - 1)]; }
    std::span<const int> images() const { return images_; }

    /// 0-based lexicographic rank within S_size().
    std::uint64_t lex_rank() const;

    Perm reverse() const;
    Perm complement() const;
    Perm inverse() const;

    std::string str(char sep = ',') const;

    friend bool operator==(const Perm&, const Perm&) = default;
    friend auto operator<=>(const Perm&, const Perm&) = default;

private:
    struct Unchecked {};
    Perm(std::vector<int> images, Unchecked) : images_(std::move(images)) {}

    std::vector<int> images_;
};

std::ostream& operator<<(std::ostream& os, const Perm& p);

struct Reflections {
    Perm reverse;
    Perm complement;
    Perm inverse;
};

Reflections reflections(const Perm& tau);

/// Pattern induced by tau on the given 1-based, strictly increasing positions.
Perm induce(const Perm& tau, std::span<const int> positions);

/// Pattern of a sequence of distinct keys (the rank of each key).
Perm pattern_of(std::span<const double> keys);
Perm pattern_of(std::span<const int> keys);

/// All permutations of S_k in lexicographic order.
std::vector<Perm> all_perms(int k);

/**
 * Parses the permutation text format: whitespace- or comma-separated positive
 * integers on one line; lines starting with '#' are comments.
 */
Perm parse_perm(std::string_view text);
Perm read_perm_file(const std::string& path);

}  // namespace permlim

#endif
