#include "stigsim/canonical.hpp"

#include <stdexcept>

namespace stigsim {

namespace {

void reject_floats(const json& value) {
    switch (value.type()) {
        case json::value_t::number_float:
            throw std::invalid_argument("canonical JSON forbids floating-point values");
        case json::value_t::object:
            for (const auto& [k, v] : value.items()) reject_floats(v);
            break;
        case json::value_t::array:
            for (const auto& v : value) reject_floats(v);
            break;
        default:
            break;
    }
}

}  // namespace

std::string canonical_dump(const json& value) {
    reject_floats(value);
    return value.dump(-1, ' ', false, json::error_handler_t::strict);
}

}  // namespace stigsim
