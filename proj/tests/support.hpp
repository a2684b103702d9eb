#pragma once

#include "cbpmn/context.hpp"
#include "cbpmn/io.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace cbpmn::test {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(CBPMN_FIXTURES) / rel; }

inline AtomicContext ctx(std::string parameter, std::string attribute, Value value,
                         std::optional<std::string> instance = std::nullopt) {
    AtomicContext c;
    c.parameter = std::move(parameter);
    c.attribute = std::move(attribute);
    c.value = std::move(value);
    c.instance = std::move(instance);
    return c;
}

inline Bundle kiosk() { return load_bundle(fixture("kiosk/bundle.json")); }

} // namespace cbpmn::test
