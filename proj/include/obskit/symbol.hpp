/**
 * @file symbol.hpp
 * @brief Interned model symbols: states, parameters, input derivatives.
 *
 * A Symbol is a pointer into a process-wide registry, so equality is pointer
 * equality and symbols can be shared freely across threads. Input symbols
 * carry a derivative order: u itself is order 0, u' order 1, and so on.
 */
#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace obskit {

enum class SymbolKind : std::uint8_t {
    State,
    Parameter,
    KnownInputDeriv,   ///< u^(j): the j-th time derivative of a known input
    UnknownInputDeriv, ///< w^(j): the j-th time derivative of an unknown input
    OutputPlaceholder, ///< y<k> labels on output lines
};

struct SymbolData {
    std::string name; ///< base name, without derivative marks
    SymbolKind kind;
    int order; ///< derivative order; 0 for states/parameters

    /// Name as shown to users: base name plus one prime per derivative order.
    std::string display() const {
        std::string s = name;
        for (int i = 0; i < order; ++i) s += '\'';
        return s;
    }
};

using Symbol = const SymbolData *;

/// Intern (name, kind, order); repeated calls return the same pointer.
inline Symbol intern_symbol(std::string_view name, SymbolKind kind, int order = 0) {
    struct Registry {
        std::mutex mu;
        std::unordered_map<std::string, std::unique_ptr<SymbolData>> map;
    };
    static Registry reg;

    std::string key;
    key.reserve(name.size() + 8);
    key.append(name);
    key += '\x1f';
    key += static_cast<char>('0' + static_cast<int>(kind));
    key += '\x1f';
    key += std::to_string(order);

    std::lock_guard<std::mutex> lock(reg.mu);
    auto it = reg.map.find(key);
    if (it != reg.map.end()) return it->second.get();
    auto data = std::make_unique<SymbolData>(SymbolData{std::string(name), kind, order});
    Symbol out = data.get();
    reg.map.emplace(std::move(key), std::move(data));
    return out;
}

/// Deterministic total order: display name, then kind, then derivative order.
inline int symbol_cmp(Symbol a, Symbol b) {
    if (a == b) return 0;
    if (int c = a->name.compare(b->name); c != 0) return c < 0 ? -1 : 1;
    if (a->order != b->order) return a->order < b->order ? -1 : 1;
    if (a->kind != b->kind)
        return static_cast<int>(a->kind) < static_cast<int>(b->kind) ? -1 : 1;
    return 0;
}

} // namespace obskit
