#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcmg/studies.hpp"

namespace dcmg {

/// Everything a CLI run depends on. Defaults reproduce the reference plant.
struct RunConfig {
    StudyContext study;
    std::vector<CaseSpec> cases = table2_cases();
    std::string output_dir = "out";
    std::uint64_t seed = 0;  // grid evaluation order only

    void validate() const;
};

/// Parses a YAML document; absent keys keep their defaults, unknown keys and
/// ill-typed values throw std::invalid_argument naming the field.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical YAML form. parse_config(dump_config(c)) reproduces c exactly.
std::string dump_config(const RunConfig& cfg);

/// FNV-1a over the canonical form.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hash_hex(std::uint64_t h);

Outcome parse_outcome(const std::string& s);
StrategyKind parse_strategy(const std::string& s);

}  // namespace dcmg
