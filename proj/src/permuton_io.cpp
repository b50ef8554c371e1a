#include "permlim/permuton_io.hpp"

#include "json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace permlim {

namespace {

using nlohmann::json;

Rational rational_field(const json& v, const char* what)
{
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational{BigInt{v.dump()}};
    if (v.is_number()) return parse_rational(v.dump());
    throw std::invalid_argument(std::string(what) + " must be a number or a \"p/q\" string");
}

double real_field(const json& v, const char* what) { return rational_field(v, what).get_d(); }

const json& require(const json& obj, const char* key)
{
    if (!obj.is_object() || !obj.contains(key))
        throw std::invalid_argument(std::string("permuton description lacks \"") + key + "\"");
    return obj.at(key);
}

GridPermuton parse_grid(const json& obj)
{
    const json& masses = require(obj, "masses");
    if (!masses.is_array() || masses.empty()) throw std::invalid_argument("\"masses\" must be a non-empty array");
    std::vector<Rational> flat;
    int n = 0;
    if (masses[0].is_array()) {
        n = static_cast<int>(masses.size());
        for (const auto& row : masses) {
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                throw std::invalid_argument("grid rows must all have length n = " + std::to_string(n));
            for (const auto& m : row) flat.push_back(rational_field(m, "grid mass"));
        }
    } else {
        n = require(obj, "n").get<int>();
        for (const auto& m : masses) flat.push_back(rational_field(m, "grid mass"));
    }
    if (obj.contains("n") && obj.at("n").get<int>() != n)
        throw std::invalid_argument("\"n\" disagrees with the nested mass rows");
    return GridPermuton::from_dense(n, flat);
}

SegmentPermuton parse_segments(const json& obj)
{
    const json& list = require(obj, "segments");
    if (!list.is_array()) throw std::invalid_argument("\"segments\" must be an array");
    std::vector<Segment> segs;
    for (const auto& s : list) {
        if (!s.is_array() || s.size() != 4) throw std::invalid_argument("each segment is [x1, y1, x2, y2]");
        segs.push_back({real_field(s[0], "coordinate"), real_field(s[1], "coordinate"), real_field(s[2], "coordinate"),
                        real_field(s[3], "coordinate")});
    }
    if (!obj.contains("masses")) return SegmentPermuton(std::move(segs));
    std::vector<double> masses;
    for (const auto& m : obj.at("masses")) masses.push_back(real_field(m, "segment mass"));
    return SegmentPermuton(std::move(segs), std::move(masses));
}

Permuton parse_node(const json& obj)
{
    const std::string type = require(obj, "type").get<std::string>();
    if (type == "grid") return parse_grid(obj);
    if (type == "segments") return parse_segments(obj);
    if (type == "perm") {
        const json& p = require(obj, "perm");
        if (p.is_string()) return from_perm(parse_perm(p.get<std::string>()));
        return from_perm(Perm{p.get<std::vector<int>>()});
    }
    if (type == "m_set") return m_set(real_field(require(obj, "a"), "a"));
    if (type == "mixture") {
        std::vector<Permuton> comps;
        std::vector<Rational> weights;
        for (const auto& c : require(obj, "components")) {
            weights.push_back(rational_field(require(c, "weight"), "weight"));
            comps.push_back(parse_node(require(c, "permuton")));
        }
        return MixturePermuton(std::move(comps), std::move(weights));
    }
    throw std::invalid_argument("unknown permuton type \"" + type + "\"");
}

}  // namespace

Permuton parse_permuton(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed permuton description: ") + e.what());
    }
    Permuton mu = [&] {
        try {
            return parse_node(doc);
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("malformed permuton description: ") + e.what());
        }
    }();
    // Grids were already checked exactly by their constructor.
    if (!mu.grid()) {
        const MarginalReport rep = marginal_check(mu, kLoadResolution, kLoadTolerance);
        if (!rep.pass) {
            std::ostringstream msg;
            msg << "non-uniform marginal: " << rep.axis << "-strip " << rep.strip << " deviates by "
                << rep.max_deviation;
            throw std::invalid_argument(msg.str());
        }
    }
    return mu;
}

Permuton load_permuton(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open permuton file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_permuton(buf.str());
}

}  // namespace permlim
