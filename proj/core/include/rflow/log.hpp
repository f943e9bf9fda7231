// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

namespace rflow::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

void set_level(Level level);
Level level();

void emit(Level level, const std::string& message);

inline void debug(const std::string& m) { emit(Level::debug, m); }
inline void info(const std::string& m) { emit(Level::info, m); }
inline void warn(const std::string& m) { emit(Level::warn, m); }
inline void error(const std::string& m) { emit(Level::error, m); }

}  // namespace rflow::log
