#include "qbm/errors.hpp"

#include <iostream>
#include <utility>

namespace qbm {

namespace {
WarningHandler& handler_slot() {
    static WarningHandler handler = [](const std::string& msg) {
        std::cerr << "warning: " << msg << '\n';
    };
    return handler;
}
} // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
    return std::exchange(handler_slot(), std::move(handler));
}

void warn(const std::string& message) {
    if (handler_slot()) handler_slot()(message);
}

} // namespace qbm
