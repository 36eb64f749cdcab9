// config.hpp - flat key/value experiment configuration.
//
//   # comment
//   [run]
//   jobs = 4
//   [readout-mono]
//   chi = 10
//   photons = 10
//
// Keys before the first section header belong to the experiment being run.
// Values are plain decimals in units of kappa; lists are comma separated.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dampsq {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ConfigFile {
    // section -> key -> raw value; the unnamed leading section is "".
    std::map<std::string, std::map<std::string, std::string>> sections;
};

ConfigFile parse_config(const std::string& text);
ConfigFile load_config(const std::filesystem::path& path);

// Typed access to one section. Every lookup marks the key as known; finish()
// rejects whatever was left unread.
class ParamReader {
public:
    ParamReader(std::string section, std::map<std::string, std::string> raw);

    double number(const std::string& key, double fallback);
    long integer(const std::string& key, long fallback);
    bool flag(const std::string& key, bool fallback);
    std::string text(const std::string& key, const std::string& fallback);
    std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed);
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);

    // Throws ConfigError naming the first unknown key.
    void finish() const;

    // Effective values, for echoing into the manifest.
    const std::map<std::string, std::string>& effective() const noexcept { return effective_; }

private:
    std::optional<std::string> take(const std::string& key);

    std::string section_;
    std::map<std::string, std::string> raw_;
    std::set<std::string> used_;
    std::map<std::string, std::string> effective_;
};

}  // namespace dampsq
