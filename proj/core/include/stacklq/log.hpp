#pragma once

#include <string>

namespace stacklq {

/// Sets the library log level from STACKLQ_LOG (trace, debug, info, warn,
/// error, off). Unset or unknown values leave the default (warn).
void configure_logging_from_env();

void set_log_level(const std::string& level);

}  // namespace stacklq
