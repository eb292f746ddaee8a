#include "embedforge/core/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "embedforge/core/error.hpp"
#include "embedforge/core/text.hpp"

namespace embedforge {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::size_t lineno, const std::string& what) {
    throw Error(ErrorKind::ConfigError,
                "toml line " + std::to_string(lineno) + ": " + what);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

json parse_scalar(const std::string& raw, std::size_t lineno) {
    std::string token = trim(raw);
    if (token.empty()) fail(lineno, "empty value");
    if (token.front() == '"') {
        if (token.size() < 2 || token.back() != '"') fail(lineno, "unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < token.size(); ++i) {
            char c = token[i];
            if (c == '\\' && i + 2 < token.size()) {
                char next = token[++i];
                switch (next) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default: fail(lineno, "unsupported escape");
                }
            } else {
                out.push_back(c);
            }
        }
        return json(out);
    }
    if (token == "true") return json(true);
    if (token == "false") return json(false);
    // Numeric: integer if it parses cleanly as one, float otherwise.
    try {
        std::size_t used = 0;
        if (token.find_first_of(".eE") == std::string::npos) {
            long long v = std::stoll(token, &used);
            if (used == token.size()) return json(v);
        } else {
            double v = std::stod(token, &used);
            if (used == token.size()) return json(v);
        }
    } catch (const std::exception&) {
    }
    fail(lineno, "unparseable value '" + token + "'");
}

json parse_value(const std::string& raw, std::size_t lineno) {
    std::string token = trim(raw);
    if (!token.empty() && token.front() == '[') {
        if (token.back() != ']') fail(lineno, "unterminated array");
        json arr = json::array();
        std::string inner = token.substr(1, token.size() - 2);
        std::string current;
        bool in_string = false;
        for (char c : inner) {
            if (c == '"') in_string = !in_string;
            if (c == ',' && !in_string) {
                if (!trim(current).empty()) arr.push_back(parse_scalar(current, lineno));
                current.clear();
            } else {
                current.push_back(c);
            }
        }
        if (!trim(current).empty()) arr.push_back(parse_scalar(current, lineno));
        return arr;
    }
    return parse_scalar(token, lineno);
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
    json root = json::object();
    json* current = &root;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = trim(strip_comment(line));
        if (stripped.empty()) continue;
        if (stripped.size() >= 4 && stripped.substr(0, 2) == "[[" &&
            stripped.substr(stripped.size() - 2) == "]]") {
            std::string name = trim(stripped.substr(2, stripped.size() - 4));
            if (name.empty()) fail(lineno, "empty table array name");
            if (!root.contains(name)) root[name] = json::array();
            if (!root[name].is_array()) fail(lineno, "'" + name + "' is not a table array");
            root[name].push_back(json::object());
            current = &root[name].back();
            continue;
        }
        if (stripped.front() == '[' && stripped.back() == ']') {
            std::string name = trim(stripped.substr(1, stripped.size() - 2));
            if (name.empty()) fail(lineno, "empty table name");
            // Dotted headers nest: [route.nano] lands in root["route"]["nano"].
            json* node = &root;
            std::size_t start = 0;
            while (start <= name.size()) {
                auto dot = name.find('.', start);
                std::string part =
                    trim(dot == std::string::npos ? name.substr(start) : name.substr(start, dot - start));
                if (part.empty()) fail(lineno, "empty table name component");
                if (!node->contains(part)) (*node)[part] = json::object();
                if (!(*node)[part].is_object()) fail(lineno, "'" + part + "' is not a table");
                node = &(*node)[part];
                if (dot == std::string::npos) break;
                start = dot + 1;
            }
            current = node;
            continue;
        }
        auto eq = stripped.find('=');
        if (eq == std::string::npos) fail(lineno, "expected key = value");
        std::string key = trim(stripped.substr(0, eq));
        if (key.empty()) fail(lineno, "empty key");
        if (!key.empty() && key.front() == '"' && key.back() == '"' && key.size() >= 2) {
            key = key.substr(1, key.size() - 2);
        }
        (*current)[key] = parse_value(stripped.substr(eq + 1), lineno);
    }
    return root;
}

nlohmann::json load_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_toml(buffer.str());
}

nlohmann::json load_config_file(const std::string& path) {
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".toml") {
        return load_toml_file(path);
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ConfigError, path + ": " + e.what());
    }
}

}  // namespace embedforge
