#pragma once

namespace fairsvdd::cli {

// Exit codes; one per error category so scripts can tell them apart.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;   // bad flags, bad config file, invalid values
inline constexpr int kExitData = 2;     // unreadable/invalid datasets or checkpoints
inline constexpr int kExitNumeric = 3;  // training aborted on a non-finite loss
inline constexpr int kExitIo = 4;       // filesystem failures
inline constexpr int kExitInternal = 5;

int run(int argc, const char* const* argv);

}  // namespace fairsvdd::cli
