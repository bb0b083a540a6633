#include "rhsim/kvconfig.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rhsim/error.hpp"
#include "rhsim/units.hpp"

namespace rhsim {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_ws(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',')) ++i;
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != ',') ++j;
        if (j > i) out.emplace_back(text.substr(i, j - i));
        i = j;
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Parse, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

KvConfig KvConfig::parse(std::string_view text) {
    KvConfig cfg;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        auto line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": unterminated section");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": expected key = value");
        Entry e;
        e.section = section;
        e.key = std::string(trim(line.substr(0, eq)));
        e.value = std::string(trim(line.substr(eq + 1)));
        e.line = line_no;
        if (e.key.empty()) throw Error(Errc::Parse, "line " + std::to_string(line_no) + ": empty key");
        cfg.entries_.push_back(std::move(e));
    }
    return cfg;
}

KvConfig KvConfig::load(const std::string& path) { return parse(read_file(path)); }

std::optional<std::string> KvConfig::get(std::string_view key, std::string_view section) const {
    std::optional<std::string> out;
    for (const auto& e : entries_)
        if (e.key == key && e.section == section) out = e.value;
    return out;
}

std::vector<const KvConfig::Entry*> KvConfig::all(std::string_view key, std::string_view section) const {
    std::vector<const Entry*> out;
    for (const auto& e : entries_)
        if (e.key == key && e.section == section) out.push_back(&e);
    return out;
}

std::vector<std::string> KvConfig::sections() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) {
        if (e.section.empty()) continue;
        if (out.empty() || out.back() != e.section) {
            bool seen = false;
            for (const auto& s : out) seen = seen || s == e.section;
            if (!seen) out.push_back(e.section);
        }
    }
    return out;
}

std::string KvConfig::get_or(std::string_view key, std::string_view fallback, std::string_view section) const {
    auto v = get(key, section);
    return v ? *v : std::string(fallback);
}

double KvConfig::get_double(std::string_view key, double fallback, std::string_view section) const {
    auto v = get(key, section);
    if (!v) return fallback;
    try {
        std::size_t used = 0;
        double d = std::stod(*v, &used);
        if (used != v->size() || !std::isfinite(d)) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw Error(Errc::Parse, "key '" + std::string(key) + "': not a number: " + *v);
    }
}

std::uint64_t KvConfig::get_uint(std::string_view key, std::uint64_t fallback, std::string_view section) const {
    auto v = get(key, section);
    return v ? parse_uint(*v) : fallback;
}

void KvConfig::add(std::string key, std::string value, std::string section) {
    entries_.push_back(Entry{std::move(section), std::move(key), std::move(value), 0});
}

void KvConfig::set(std::string_view key, std::string value, std::string_view section) {
    bool found = false;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (it->key == key && it->section == section) {
            if (!found) {
                it->value = value;
                found = true;
                ++it;
            } else {
                it = entries_.erase(it);
            }
        } else {
            ++it;
        }
    }
    if (!found) add(std::string(key), std::move(value), std::string(section));
}

// ---- units ---------------------------------------------------------------

std::uint64_t parse_uint(std::string_view text) {
    text = trim(text);
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
        base = 16;
    }
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v, base);
    if (ec != std::errc() || p != text.data() + text.size() || text.empty())
        throw Error(Errc::Parse, "not an unsigned integer: '" + std::string(text) + "'");
    return v;
}

std::string to_hex(std::uint64_t v, int min_digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "0x%0*llX", min_digits, static_cast<unsigned long long>(v));
    return buf;
}

Picos parse_duration(std::string_view text, Picos t_refi) {
    text = trim(text);
    std::size_t split = 0;
    while (split < text.size() && (std::isdigit(static_cast<unsigned char>(text[split])) || text[split] == '.')) ++split;
    auto number = text.substr(0, split);
    auto unit = trim(text.substr(split));
    if (number.empty()) throw Error(Errc::Parse, "bad duration '" + std::string(text) + "'");
    long double value = 0;
    try {
        value = std::stold(std::string(number));
    } catch (const std::exception&) {
        throw Error(Errc::Parse, "bad duration '" + std::string(text) + "'");
    }
    long double scale = 0;
    if (unit.empty() || unit == "ps") scale = 1;
    else if (unit == "ns") scale = kPsPerNs;
    else if (unit == "us") scale = kPsPerUs;
    else if (unit == "ms") scale = kPsPerMs;
    else if (unit == "s") scale = kPsPerSec;
    else if (unit == "trefi") {
        if (t_refi <= 0) throw Error(Errc::Parse, "trefi unit needs timing parameters");
        scale = static_cast<long double>(t_refi);
    } else {
        throw Error(Errc::Parse, "unknown duration unit '" + std::string(unit) + "'");
    }
    return static_cast<Picos>(std::llround(value * scale));
}

std::string format_duration(Picos ps) {
    char buf[64];
    auto a = ps < 0 ? -ps : ps;
    if (a >= kPsPerSec) std::snprintf(buf, sizeof buf, "%.6gs", static_cast<double>(ps) / kPsPerSec);
    else if (a >= kPsPerMs) std::snprintf(buf, sizeof buf, "%.6gms", static_cast<double>(ps) / kPsPerMs);
    else if (a >= kPsPerUs) std::snprintf(buf, sizeof buf, "%.6gus", static_cast<double>(ps) / kPsPerUs);
    else if (a >= kPsPerNs) std::snprintf(buf, sizeof buf, "%.6gns", static_cast<double>(ps) / kPsPerNs);
    else std::snprintf(buf, sizeof buf, "%lldps", static_cast<long long>(ps));
    return buf;
}

}  // namespace rhsim
