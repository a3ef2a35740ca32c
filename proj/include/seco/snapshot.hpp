#pragma once

#include <string>

#include "seco/trainer.hpp"

namespace seco {

inline constexpr int kSnapshotVersion = 1;

struct Snapshot {
  Config config;
  StudentState student;
  EmaParams teacher;
  PrototypeBank bank;
};

void save_snapshot(const std::string& path, const Snapshot& snapshot);

/// Throws Errc::bad_snapshot on unreadable files, malformed JSON, or a
/// version mismatch.
Snapshot load_snapshot(const std::string& path);

}  // namespace seco
