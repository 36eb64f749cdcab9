#include "dampsq/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dampsq/csv.hpp"

namespace dampsq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& section, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    char* end = nullptr;
    errno = 0;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(d)) {
        throw ConfigError("[" + section + "] " + key + ": '" + value + "' is not a number");
    }
    return d;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out;
}

}  // namespace

ConfigFile parse_config(const std::string& text) {
    ConfigFile cfg;
    cfg.sections[""];
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty section name");
            cfg.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        auto& sec = cfg.sections[section];
        if (sec.count(key)) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        sec[key] = value;
    }
    return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ParamReader::ParamReader(std::string section, std::map<std::string, std::string> raw)
    : section_(std::move(section)), raw_(std::move(raw)) {}

std::optional<std::string> ParamReader::take(const std::string& key) {
    used_.insert(key);
    auto it = raw_.find(key);
    if (it == raw_.end()) return std::nullopt;
    return it->second;
}

double ParamReader::number(const std::string& key, double fallback) {
    const auto raw = take(key);
    const double v = raw ? parse_number(section_, key, *raw) : fallback;
    effective_[key] = format_double(v);
    return v;
}

long ParamReader::integer(const std::string& key, long fallback) {
    const auto raw = take(key);
    long v = fallback;
    if (raw) {
        const double d = parse_number(section_, key, *raw);
        if (d != std::floor(d) || std::abs(d) > 1e15) {
            throw ConfigError("[" + section_ + "] " + key + ": '" + *raw + "' is not an integer");
        }
        v = static_cast<long>(d);
    }
    effective_[key] = std::to_string(v);
    return v;
}

bool ParamReader::flag(const std::string& key, bool fallback) {
    const auto raw = take(key);
    bool v = fallback;
    if (raw) {
        if (*raw == "true" || *raw == "1" || *raw == "yes") {
            v = true;
        } else if (*raw == "false" || *raw == "0" || *raw == "no") {
            v = false;
        } else {
            throw ConfigError("[" + section_ + "] " + key + ": '" + *raw + "' is not a boolean");
        }
    }
    effective_[key] = v ? "true" : "false";
    return v;
}

std::string ParamReader::text(const std::string& key, const std::string& fallback) {
    const auto raw = take(key);
    const std::string v = raw ? *raw : fallback;
    effective_[key] = v;
    return v;
}

std::string ParamReader::choice(const std::string& key, const std::string& fallback,
                                const std::vector<std::string>& allowed) {
    const std::string v = text(key, fallback);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        throw ConfigError("[" + section_ + "] " + key + ": '" + v + "' is not one of " + list);
    }
    return v;
}

std::vector<double> ParamReader::numbers(const std::string& key, const std::vector<double>& fallback) {
    const auto raw = take(key);
    std::vector<double> v = fallback;
    if (raw) {
        v.clear();
        std::istringstream in(*raw);
        std::string item;
        while (std::getline(in, item, ',')) {
            if (trim(item).empty()) continue;
            v.push_back(parse_number(section_, key, item));
        }
    }
    effective_[key] = join(v);
    return v;
}

void ParamReader::finish() const {
    for (const auto& [key, value] : raw_) {
        if (!used_.count(key)) throw ConfigError("[" + section_ + "] unknown key '" + key + "'");
    }
}

}  // namespace dampsq
