// Copyright (c) 2026 The volte-sim Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef VOLTE_IO_MANIFEST_HPP
#define VOLTE_IO_MANIFEST_HPP

#include <map>
#include <memory>
#include <string>
#include <string_view>

#include <json.hpp>
#include <openssl/evp.h>

#include "volte/common.hpp"

namespace volte::io {

inline constexpr std::string_view kToolName = "volte-sim";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Lowercase hex SHA-256.
inline std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

/// What a run consumed and produced. No timestamps or host details, so the
/// same config and seed always give the same manifest bytes.
struct RunManifest {
    std::string command;
    std::string scenario;
    std::uint64_t seed = 0;
    std::string config_text;
    /// Input label -> sha256 of its bytes.
    std::map<std::string, std::string> inputs;
    /// Output path relative to the out dir -> sha256.
    std::map<std::string, std::string> outputs;

    std::string config_sha256() const { return sha256_hex(config_text); }

    nlohmann::ordered_json body() const {
        nlohmann::ordered_json j;
        j["tool"] = kToolName;
        j["version"] = kToolVersion;
        j["command"] = command;
        j["scenario"] = scenario;
        j["seed"] = seed;
        j["config_sha256"] = config_sha256();
        j["config"] = config_text;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        return j;
    }

    /// Digest over everything above; equal digests mean equal runs.
    std::string digest() const { return sha256_hex(body().dump()); }

    std::string to_json() const {
        auto j = body();
        j["digest"] = digest();
        return j.dump(2) + "\n";
    }

    static RunManifest from_json(const std::string& text, const std::string& origin) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError(origin + ": manifest is not valid JSON (" + e.what() + ")");
        }
        RunManifest m;
        try {
            if (j.at("tool").get<std::string>() != kToolName) {
                throw ConfigError(origin + ": not a " + std::string(kToolName) + " manifest");
            }
            m.command = j.at("command").get<std::string>();
            m.scenario = j.at("scenario").get<std::string>();
            m.seed = j.at("seed").get<std::uint64_t>();
            m.config_text = j.at("config").get<std::string>();
            m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
            m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(origin + ": malformed manifest (" + e.what() + ")");
        }
        if (j.contains("config_sha256") && j["config_sha256"] != m.config_sha256()) {
            throw ConfigError(origin + ": config_sha256 does not match embedded config");
        }
        return m;
    }
};

}  // namespace volte::io

#endif  // VOLTE_IO_MANIFEST_HPP
