#pragma once
// Named metric families used by the command line tool and the tests.

#include <map>
#include <string>
#include <vector>

#include "psc/metric.hpp"

namespace psc {

struct RegistryEntry {
    std::string name;
    std::string summary;
    std::map<std::string, double> defaults;
};

const std::vector<RegistryEntry>& registry_entries();

// Builds the named family with parameter overrides. Unknown names or
// parameters throw MetricSpecError.
MetricSpec registry_spec(const std::string& name,
                         const std::map<std::string, double>& params = {});

} // namespace psc
