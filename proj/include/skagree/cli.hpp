// Command-line front end.
//
//   skagree region inner-nofb|outer-nofb|inner-fb|fm-verify ...
//   skagree simulate nofb|fb ...
//   skagree reduce wiretap ...
//
// Exit codes: 0 success, 1 usage or validation error, 2 internal failure.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace skagree {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitInternal = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "SKAGREE_OUT_DIR";

/// `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, char** argv);

/// 64-bit FNV-1a, hex encoded.
std::string config_hash(const std::string& text);

}  // namespace skagree
