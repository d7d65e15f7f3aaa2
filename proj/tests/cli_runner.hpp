#pragma once

// Runs the command-line tool as a child process and captures its output.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cli {

struct Outcome {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// `args` is appended verbatim, so callers quote paths with quote().
inline Outcome run(const std::string& binary, const std::string& args, const std::filesystem::path& scratch) {
    const auto err_path = scratch / "stderr.txt";
    const std::string command = quote(binary) + " " + args + " 2>" + quote(err_path.string());
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr) throw std::runtime_error("popen failed");
    Outcome o;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), got);
    const int status = ::pclose(pipe);
    o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.err = slurp(err_path);
    return o;
}

}  // namespace cli
