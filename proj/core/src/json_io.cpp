#include "lcurve/json_io.hpp"

#include <numeric>

#include "json.hpp"
#include "lcurve/errors.hpp"

namespace lcurve {

using ojson = nlohmann::ordered_json;

namespace {

ojson arch_json(const NetworkArch& a)
{
    return ojson{{"depth", a.depth},
                 {"activation", to_string(a.activation)},
                 {"kind", to_string(a.kind)},
                 {"sigma_w", a.sigma_w},
                 {"sigma_b", a.sigma_b}};
}

NetworkArch arch_of(const ojson& j)
{
    NetworkArch a;
    a.depth = j.at("depth").get<int>();
    a.activation = parse_activation(j.at("activation").get<std::string>());
    a.kind = parse_kernel_kind(j.at("kind").get<std::string>());
    a.sigma_w = j.at("sigma_w").get<std::vector<double>>();
    a.sigma_b = j.at("sigma_b").get<std::vector<double>>();
    a.validate();
    return a;
}

ojson vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_of(const ojson& j)
{
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class F>
auto guarded(const std::string& what, F&& f)
{
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

} // namespace

std::string to_json(const NetworkArch& arch) { return arch_json(arch).dump(); }

std::string to_json(const KernelSeries& ks)
{
    ojson j{{"d", ks.d}, {"Q", ks.Q}, {"b", ks.b}, {"kxx", ks.kxx}};
    if (ks.provenance) {
        ojson p = arch_json(*ks.provenance);
        p["type"] = "network";
        j["provenance"] = p;
    } else {
        j["provenance"] = ojson{{"type", "user-supplied"}};
    }
    j["diagnostics"] = ks.diagnostics;
    return j.dump();
}

std::string to_json(const Spectrum& sp)
{
    return ojson{{"d", sp.d}, {"lambda", sp.lambda}, {"deg", sp.deg}, {"sigma2", sp.sigma2}, {"kxx", sp.kxx}}.dump();
}

std::string to_json(const SpectralTarget& tgt)
{
    ojson j{{"d", tgt.d}, {"w2", tgt.w2}, {"tail2", tgt.tail2}, {"realization", nullptr}};
    if (const auto* z = std::get_if<ZonalTarget>(&tgt.realization)) {
        ojson anchors = ojson::array();
        for (const auto& a : z->anchors) anchors.push_back({{"l", a.l}, {"alpha", a.alpha}, {"w", vec_json(a.w)}});
        j["realization"] = {{"type", "zonal"}, {"anchors", anchors}};
    } else if (const auto* r = std::get_if<RidgeTarget>(&tgt.realization)) {
        ojson rj{{"type", "ridge"}, {"profile", r->h.name}, {"scale", r->h.scale}, {"w", vec_json(r->w)}};
        if (r->h.name == "legendre") rj["degree"] = r->h.degree;
        if (r->h.name == "table") {
            rj["t"] = r->h.t;
            rj["h"] = r->h.h;
        }
        j["realization"] = rj;
    }
    return j.dump();
}

NetworkArch arch_from_json(const std::string& text)
{
    return guarded("NetworkArch JSON", [&] { return arch_of(ojson::parse(text)); });
}

KernelSeries kernel_series_from_json(const std::string& text)
{
    return guarded("KernelSeries JSON", [&] {
        const ojson j = ojson::parse(text);
        KernelSeries ks;
        ks.d = j.at("d").get<int>();
        ks.b = j.at("b").get<std::vector<double>>();
        if (ks.b.empty()) throw ConfigError("KernelSeries JSON: empty coefficient list");
        ks.Q = static_cast<int>(ks.b.size()) - 1;
        ks.kxx = j.contains("kxx") ? j.at("kxx").get<double>() : std::accumulate(ks.b.begin(), ks.b.end(), 0.0);
        if (j.contains("provenance") && j.at("provenance").value("type", "") == "network")
            ks.provenance = arch_of(j.at("provenance"));
        if (j.contains("diagnostics")) ks.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        return ks;
    });
}

Spectrum spectrum_from_json(const std::string& text)
{
    return guarded("Spectrum JSON", [&] {
        const ojson j = ojson::parse(text);
        Spectrum sp;
        sp.d = j.at("d").get<int>();
        sp.lambda = j.at("lambda").get<std::vector<double>>();
        sp.deg = j.at("deg").get<std::vector<double>>();
        sp.sigma2 = j.at("sigma2").get<double>();
        sp.kxx = j.at("kxx").get<double>();
        if (sp.deg.size() != sp.lambda.size()) throw ConfigError("Spectrum JSON: lambda and deg lengths differ");
        return sp;
    });
}

SpectralTarget target_from_json(const std::string& text)
{
    return guarded("SpectralTarget JSON", [&] {
        const ojson j = ojson::parse(text);
        SpectralTarget t = spectral_target(j.at("d").get<int>(), j.at("w2").get<std::vector<double>>(),
                                           j.value("tail2", 0.0));
        if (!j.contains("realization") || j.at("realization").is_null()) return t;
        const ojson& r = j.at("realization");
        const std::string type = r.at("type").get<std::string>();
        if (type == "zonal") {
            ZonalTarget z;
            z.d = t.d;
            for (const auto& a : r.at("anchors")) z.anchors.push_back({vec_of(a.at("w")), a.at("l").get<int>(), a.at("alpha").get<double>()});
            t.realization = std::move(z);
        } else if (type == "ridge") {
            RidgeTarget rt;
            rt.d = t.d;
            rt.w = vec_of(r.at("w"));
            rt.h.name = r.at("profile").get<std::string>();
            rt.h.scale = r.value("scale", 1.0);
            rt.h.degree = r.value("degree", 0);
            if (rt.h.name == "table") {
                rt.h.t = r.at("t").get<std::vector<double>>();
                rt.h.h = r.at("h").get<std::vector<double>>();
            }
            t.realization = std::move(rt);
        } else {
            throw ConfigError("SpectralTarget JSON: unknown realization type '" + type + "'");
        }
        return t;
    });
}

} // namespace lcurve
