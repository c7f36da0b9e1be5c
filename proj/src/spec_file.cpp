#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qrepsim/error.hpp"
#include "qrepsim/experiments.hpp"

namespace qrepsim {

SpecParseError::SpecParseError(int line, std::string field, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ", field '" + field + "': " + message
                                  : "field '" + field + "': " + message),
      line_(line),
      field_(std::move(field)) {}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

// Splits on commas outside parentheses.
std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i < s.size()) {
            if (s[i] == '(') ++depth;
            if (s[i] == ')') --depth;
            if (s[i] != ',' || depth != 0) continue;
        }
        out.push_back(trim(s.substr(start, i - start)));
        start = i + 1;
    }
    return out;
}

struct Entry {
    int line;
    std::string key;
    std::string_view value;
};

class FieldParser {
public:
    explicit FieldParser(const Entry& entry) : e_(entry) {}

    [[noreturn]] void fail(const std::string& message) const { throw SpecParseError(e_.line, e_.key, message); }

    double number(std::string_view token) const {
        double v = 0.0;
        const auto* end = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(token.data(), end, v);
        if (token.empty() || ec != std::errc{} || ptr != end) fail("'" + std::string(token) + "' is not a number");
        return v;
    }

    std::int64_t integer(std::string_view token) const {
        std::int64_t v = 0;
        const auto* end = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(token.data(), end, v);
        if (token.empty() || ec != std::errc{} || ptr != end) fail("'" + std::string(token) + "' is not an integer");
        return v;
    }

    std::uint64_t unsigned_integer(std::string_view token) const {
        std::uint64_t v = 0;
        const auto* end = token.data() + token.size();
        const auto [ptr, ec] = std::from_chars(token.data(), end, v);
        if (token.empty() || ec != std::errc{} || ptr != end) {
            fail("'" + std::string(token) + "' is not a non-negative integer");
        }
        return v;
    }

    // Matches `name(a, b, ...)` and splits out the arguments.
    bool call(std::string_view value, std::string_view name, std::vector<std::string_view>& args) const {
        if (value.substr(0, name.size()) != name) return false;
        auto rest = trim(value.substr(name.size()));
        if (rest.empty() || rest.front() != '(') return false;
        if (rest.back() != ')') fail("unterminated " + std::string(name) + "(...)");
        args = split_commas(rest.substr(1, rest.size() - 2));
        return true;
    }

    std::vector<double> number_list() const {
        std::vector<double> out;
        for (auto token : tokens()) {
            std::vector<std::string_view> args;
            if (!call(token, "logrange", args)) {
                out.push_back(number(token));
                continue;
            }
            if (args.size() != 3) fail("logrange takes (start, stop, count)");
            const double lo = number(args[0]);
            const double hi = number(args[1]);
            const auto count = integer(args[2]);
            if (!(lo > 0.0 && hi > 0.0)) fail("logrange bounds must be positive");
            if (count < 1) fail("logrange count must be >= 1");
            const double a = std::log10(lo);
            const double b = std::log10(hi);
            for (std::int64_t i = 0; i < count; ++i) {
                out.push_back(i == 0 ? lo : i == count - 1 ? hi : std::pow(10.0, a + (b - a) * i / (count - 1)));
            }
        }
        return out;
    }

    std::vector<int> int_list() const {
        std::vector<int> out;
        for (auto token : tokens()) {
            std::vector<std::string_view> args;
            if (!call(token, "range", args)) {
                out.push_back(static_cast<int>(integer(token)));
                continue;
            }
            if (args.size() != 2) fail("range takes (first, last)");
            const auto first = integer(args[0]);
            const auto last = integer(args[1]);
            if (last < first) fail("range is empty");
            for (auto v = first; v <= last; ++v) out.push_back(static_cast<int>(v));
        }
        return out;
    }

    std::vector<std::string_view> tokens() const {
        if (trim(e_.value).empty()) fail("list must not be empty");
        auto out = split_commas(e_.value);
        for (auto token : out) {
            if (token.empty()) fail("empty list element");
        }
        return out;
    }

    double scalar() const {
        const auto t = tokens();
        if (t.size() != 1) fail("expected a single value");
        return number(t.front());
    }

private:
    const Entry& e_;
};

}  // namespace

SweepSpec parse_sweep_spec(std::string_view text) {
    std::map<std::string, Entry> entries;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw SpecParseError(line_no, std::string(line), "expected 'key = value'");
        std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw SpecParseError(line_no, key, "missing key");
        if (entries.count(key) != 0) throw SpecParseError(line_no, key, "duplicate key");
        entries.emplace(key, Entry{line_no, key, trim(line.substr(eq + 1))});
    }

    SweepSpec spec;
    for (const auto& [key, entry] : entries) {
        const FieldParser f(entry);
        if (key == "nodes") {
            spec.node_values = f.int_list();
        } else if (key == "dephasing_times") {
            spec.dephasing_values_s = f.number_list();
        } else if (key == "bsm_idealities") {
            spec.bsm_values = f.number_list();
        } else if (key == "protocols") {
            spec.protocols.clear();
            for (auto token : f.tokens()) {
                try {
                    spec.protocols.push_back(parse_protocol(token));
                } catch (const InvalidParameter& e) {
                    f.fail(e.what());
                }
            }
        } else if (key == "total_length_km") {
            spec.total_length_km = f.scalar();
        } else if (key == "attenuation_length_km") {
            spec.attenuation_length_km = f.scalar();
        } else if (key == "fiber_speed") {
            spec.fiber_speed_m_per_s = f.scalar();
        } else if (key == "trials") {
            spec.trials = f.unsigned_integer(entry.value);
        } else if (key == "master_seed") {
            spec.master_seed = f.unsigned_integer(entry.value);
        } else if (key == "attempt_cap") {
            spec.options.attempt_cap = f.unsigned_integer(entry.value);
        } else if (key == "accounting") {
            try {
                spec.options.accounting = parse_accounting(entry.value);
            } catch (const InvalidParameter& e) {
                f.fail(e.what());
            }
        } else {
            f.fail("unknown key");
        }
    }
    if (entries.count("nodes") == 0) throw SpecParseError(0, "nodes", "required key is missing");
    if (entries.count("dephasing_times") == 0) throw SpecParseError(0, "dephasing_times", "required key is missing");

    try {
        spec.validate();
    } catch (const InvalidParameter& e) {
        throw SpecParseError(0, "spec", e.what());
    }
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open sweep spec '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_sweep_spec(text.str());
}

}  // namespace qrepsim
