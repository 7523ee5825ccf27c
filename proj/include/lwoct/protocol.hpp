#pragma once

#include "lwoct/annotate.hpp"
#include "lwoct/config.hpp"
#include "lwoct/error.hpp"
#include "lwoct/io/base64.hpp"
#include "lwoct/io/png.hpp"
#include "lwoct/io/portable.hpp"
#include "lwoct/io/record.hpp"
#include "lwoct/io/vol.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace lwoct {

inline nlohmann::json to_json(const Preview& p)
{
    using nlohmann::json;
    switch (p.kind) {
    case Preview::Kind::Empty:
        return {{"kind", "empty"}};
    case Preview::Kind::Boundary:
        return {{"kind", "boundary"}, {"boundary", io::to_json(p.boundary)}};
    case Preview::Kind::Path: {
        json path = json::array();
        for (const auto& px : p.path)
            path.push_back({px.x, px.y});
        return {{"kind", "path"}, {"path", std::move(path)}};
    }
    }
    return {};
}

/// Loads a .vol file or a portable manifest, chosen by extension.
inline Volume load_volume_any(const std::filesystem::path& path)
{
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".vol")
        return io::load_vol(path);
    return io::load_portable(path);
}

/// Line-delimited JSON request handling for one connection. Owns the volume and one session per B-scan.
class ProtocolHandler {
public:
    explicit ProtocolHandler(PipelineConfig config = PipelineConfig::defaults(), Session::Clock clock = steady_seconds)
        : config_(std::move(config)), clock_(std::move(clock))
    {
        validate(config_);
    }

    std::string handle_line(std::string_view line)
    {
        nlohmann::json id = nullptr;
        try {
            nlohmann::json request;
            try {
                request = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::BadRequest, std::string("malformed JSON: ") + e.what());
            }
            if (!request.is_object())
                throw Error(ErrorCode::BadRequest, "request must be a JSON object");
            id = request.value("id", nlohmann::json(nullptr));
            const auto verb = request.value("verb", std::string{});
            const auto payload = request.value("payload", nlohmann::json::object());
            nlohmann::json result = dispatch(verb, payload);
            return nlohmann::json{{"id", id}, {"ok", true}, {"payload", std::move(result)}}.dump();
        } catch (const Error& e) {
            return failure(id, to_string(e.code()), e.what());
        } catch (const nlohmann::json::exception& e) {
            return failure(id, "bad_request", e.what());
        } catch (const std::exception& e) {
            return failure(id, "internal", e.what());
        }
    }

    const std::optional<Volume>& volume() const noexcept { return volume_; }
    const std::map<int, Session>& sessions() const noexcept { return sessions_; }
    const PipelineConfig& config() const noexcept { return config_; }

private:
    static std::string failure(const nlohmann::json& id, std::string_view code, std::string_view message)
    {
        return nlohmann::json{{"id", id}, {"ok", false}, {"error", {{"code", code}, {"message", message}}}}.dump();
    }

    static std::optional<double> client_time(const nlohmann::json& p)
    {
        std::optional<double> t;
        if (auto it = p.find("t"); it != p.end())
            t.emplace(it->get<double>());
        return t;
    }

    nlohmann::json dispatch(const std::string& verb, const nlohmann::json& p)
    {
        if (verb == "load_volume")
            return load_volume(p);
        if (verb == "get_slice")
            return get_slice(p);
        if (verb == "set_mode")
            return set_mode(p);
        if (verb == "add_anchor") {
            return to_json(active().add_anchor(p.at("x").get<int>(), p.at("y").get<double>(), client_time(p)));
        }
        if (verb == "undo_anchor")
            return to_json(active().undo_anchor());
        if (verb == "commit") {
            return io::to_json(active().commit(client_time(p)));
        }
        if (verb == "splice") {
            auto anchor = [](const nlohmann::json& j) {
                return Anchor{j.at("x").get<int>(), j.at("y").get<double>(), j.value("t", 0.0)};
            };
            const auto id = boundary_from_string(p.at("boundary").get<std::string>());
            return io::to_json(active().splice(id, anchor(p.at("a")), anchor(p.at("b"))));
        }
        if (verb == "filter_fluids") {
            auto min = p.contains("min_area_px") ? std::optional<int>(p.at("min_area_px").get<int>()) : std::nullopt;
            return io::to_json(active().filter_fluids(min));
        }
        if (verb == "export")
            return export_records(p);
        if (verb == "get_config")
            return to_json(config_);
        if (verb == "set_config") {
            auto next = config_from_json(p.at("config"));
            for (auto& [index, s] : sessions_)
                s.set_config(next);
            config_ = std::move(next);
            return to_json(config_);
        }
        throw Error(ErrorCode::UnknownVerb, "unknown verb '" + verb + "'");
    }

    const Volume& require_volume() const
    {
        if (!volume_)
            throw Error(ErrorCode::NoVolume, "no volume loaded");
        return *volume_;
    }

    const BScan& bscan_at(int index) const
    {
        const auto& v = require_volume();
        if (index < 0 || index >= static_cast<int>(v.bscans.size()))
            throw Error(ErrorCode::OutOfBounds, "B-scan index " + std::to_string(index) + " out of range");
        return v.bscans[static_cast<std::size_t>(index)];
    }

    Session& active()
    {
        require_volume();
        if (!active_)
            throw Error(ErrorCode::InvalidMode, "no active mode; call set_mode first");
        return sessions_.at(*active_);
    }

    nlohmann::json load_volume(const nlohmann::json& p)
    {
        Volume v = load_volume_any(p.at("path").get<std::string>());
        volume_ = std::move(v);
        grader_id_ = p.value("grader_id", std::string{});
        sessions_.clear();
        active_.reset();
        return {{"id", volume_->id},
                {"scan_kind", to_string(volume_->scan_kind)},
                {"eye", to_string(volume_->eye)},
                {"num_bscans", volume_->bscans.size()},
                {"width", volume_->width()},
                {"height", volume_->height()}};
    }

    nlohmann::json get_slice(const nlohmann::json& p)
    {
        const int index = p.value("index", 0);
        const auto& b = bscan_at(index);
        const auto png = io::encode_png_gray8(b.pixels);
        return {{"index", index}, {"width", b.width()}, {"height", b.height()}, {"png_base64", io::base64_encode(png)}};
    }

    nlohmann::json set_mode(const nlohmann::json& p)
    {
        const int index = p.value("bscan_index", active_.value_or(0));
        const auto& b = bscan_at(index);
        const auto name = p.at("mode").get<std::string>();
        SessionMode mode;
        if (name == "layer" || name == "grid") {
            mode.kind = name == "layer" ? SessionModeKind::LayerLivewire : SessionModeKind::Grid;
            mode.boundary = boundary_from_string(p.at("boundary").get<std::string>());
        } else if (name == "fluid") {
            mode.kind = SessionModeKind::Fluid;
            mode.label = fluid_label_from_string(p.value("label", "Unlabeled"));
        } else {
            throw Error(ErrorCode::InvalidMode, "unknown mode '" + name + "'");
        }
        auto it = sessions_.find(index);
        if (it == sessions_.end())
            it = sessions_.try_emplace(index, b, volume_->id, volume_->scan_kind, config_, grader_id_, clock_).first;
        it->second.set_mode(mode);
        active_ = index;
        return {{"bscan_index", index}, {"mode", name}};
    }

    nlohmann::json export_records(const nlohmann::json& p)
    {
        require_volume();
        const std::filesystem::path out = p.at("out_dir").get<std::string>();
        nlohmann::json files = nlohmann::json::array();
        for (const auto& [index, s] : sessions_) {
            const auto written = io::export_record(s.record(), s.bscan(), out);
            files.push_back(written.json.string());
            for (const auto& c : written.csvs)
                files.push_back(c.string());
            files.push_back(written.overlay.string());
        }
        return {{"files", std::move(files)}};
    }

    PipelineConfig config_;
    Session::Clock clock_;
    std::string grader_id_;
    std::optional<Volume> volume_;
    std::map<int, Session> sessions_;
    std::optional<int> active_;
};

} // namespace lwoct
