#include "evsoar/wire.hpp"

#include <bit>
#include <cstring>
#include <stdexcept>

namespace evsoar::wire {

namespace {

struct Writer {
    std::vector<uint8_t>& out;

    void u8(uint8_t v) { out.push_back(v); }
    void u16(uint16_t v) {
        out.push_back(static_cast<uint8_t>(v >> 8));
        out.push_back(static_cast<uint8_t>(v));
    }
    void u32(uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
    }
    void u64(uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
    }
    void f32(float v) { u32(std::bit_cast<uint32_t>(v)); }
    void bytes(std::span<const uint8_t> b) { out.insert(out.end(), b.begin(), b.end()); }
};

struct Reader {
    std::span<const uint8_t> in;
    size_t pos = 0;
    bool failed = false;

    bool need(size_t n) {
        if (pos + n > in.size()) {
            failed = true;
            return false;
        }
        return true;
    }
    uint8_t u8() {
        if (!need(1)) return 0;
        return in[pos++];
    }
    uint16_t u16() {
        if (!need(2)) return 0;
        uint16_t v = static_cast<uint16_t>(in[pos] << 8 | in[pos + 1]);
        pos += 2;
        return v;
    }
    uint32_t u32() {
        if (!need(4)) return 0;
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | in[pos + i];
        pos += 4;
        return v;
    }
    uint64_t u64() {
        if (!need(8)) return 0;
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | in[pos + i];
        pos += 8;
        return v;
    }
    float f32() { return std::bit_cast<float>(u32()); }
    bool done() const { return pos == in.size(); }
};

void write_record(Writer& w, const LogRecord& r) {
    w.u64(r.timestamp_us);
    w.u32(r.component_id);
    w.u32(r.message_id);
    w.bytes(r.payload);
    w.u8(static_cast<uint8_t>(r.attack_tag));
}

bool read_record(Reader& r, LogRecord& rec) {
    rec.timestamp_us = r.u64();
    rec.component_id = r.u32();
    rec.message_id = r.u32();
    if (!r.need(8)) return false;
    std::memcpy(rec.payload.data(), r.in.data() + r.pos, 8);
    r.pos += 8;
    const uint8_t tag = r.u8();
    if (r.failed || tag > 4) return false;
    rec.attack_tag = static_cast<AttackTag>(tag);
    return true;
}

void write_params(Writer& w, const learn::ModelParams& p) {
    w.u32(static_cast<uint32_t>(p.sample_count));
    w.u8(static_cast<uint8_t>(p.layer_sizes.size()));
    for (uint32_t s : p.layer_sizes) w.u16(static_cast<uint16_t>(s));
    for (float v : p.weights) w.f32(v);
}

bool read_params(Reader& r, learn::ModelParams& p) {
    p.sample_count = r.u32();
    const uint8_t layers = r.u8();
    if (r.failed || layers < 2) return false;
    p.layer_sizes.resize(layers);
    for (auto& s : p.layer_sizes) s = r.u16();
    if (r.failed) return false;
    size_t n = 0;
    for (size_t l = 0; l + 1 < p.layer_sizes.size(); ++l) {
        if (p.layer_sizes[l] == 0 || p.layer_sizes[l + 1] == 0) return false;
        n += static_cast<size_t>(p.layer_sizes[l] + 1) * p.layer_sizes[l + 1];
    }
    if (!r.need(4 * n)) return false;
    p.weights.resize(n);
    for (auto& v : p.weights) v = r.f32();
    return !r.failed;
}

void write_central_model(Writer& w, const learn::CentralModel& m) {
    w.f32(m.learning_rate);
    w.f32(m.base_score);
    w.u32(static_cast<uint32_t>(m.stumps.size()));
    for (const auto& s : m.stumps) {
        w.u8(static_cast<uint8_t>(s.feature));
        w.f32(s.threshold);
        w.f32(s.left);
        w.f32(s.right);
    }
}

bool read_central_model(Reader& r, learn::CentralModel& m) {
    m.learning_rate = r.f32();
    m.base_score = r.f32();
    const uint32_t count = r.u32();
    if (r.failed || !r.need(static_cast<size_t>(count) * 13)) return false;
    m.stumps.resize(count);
    for (auto& s : m.stumps) {
        s.feature = r.u8();
        if (s.feature >= learn::kFeatureCount) return false;
        s.threshold = r.f32();
        s.left = r.f32();
        s.right = r.f32();
    }
    m.rounds = count;
    return !r.failed;
}

} // namespace

MessageKind Message::kind() const {
    switch (body.index()) {
        case 0: return MessageKind::hello;
        case 1: return MessageKind::auth_ok;
        case 2: return MessageKind::log_batch;
        case 3: return MessageKind::fl_params;
        case 4: return MessageKind::model_update;
        case 5: return MessageKind::alert;
        case 6: return MessageKind::response_action;
        case 7: return MessageKind::ack;
        default: return MessageKind::disconnect;
    }
}

uint32_t crc32(std::span<const uint8_t> data) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = 0xFFFFFFFFu;
    for (uint8_t b : data) crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

std::vector<uint8_t> encode(const Message& msg) {
    std::vector<uint8_t> payload;
    Writer w{payload};

    const MessageKind kind = msg.kind();
    switch (kind) {
        case MessageKind::hello: {
            const auto& h = std::get<Hello>(msg.body);
            w.u64(h.vehicle_id);
            w.u32(h.oem_id);
            w.bytes(h.token);
            break;
        }
        case MessageKind::auth_ok:
        case MessageKind::ack:
            w.u64(msg.session_id);
            break;
        case MessageKind::log_batch: {
            const auto& b = std::get<LogBatch>(msg.body);
            w.u64(msg.session_id);
            w.u32(static_cast<uint32_t>(b.records.size()));
            for (const auto& rec : b.records) write_record(w, rec);
            break;
        }
        case MessageKind::fl_params: {
            w.u64(msg.session_id);
            write_params(w, std::get<FlParams>(msg.body).params);
            break;
        }
        case MessageKind::model_update: {
            const auto& u = std::get<ModelUpdate>(msg.body);
            w.u64(msg.session_id);
            w.u32(u.version);
            if (std::holds_alternative<learn::CentralModel>(u.model)) {
                w.u8(0);
                write_central_model(w, std::get<learn::CentralModel>(u.model));
            } else {
                w.u8(1);
                write_params(w, std::get<learn::ModelParams>(u.model));
            }
            break;
        }
        case MessageKind::alert: {
            const auto& a = std::get<AlertBody>(msg.body).alert;
            w.u64(msg.session_id);
            w.u64(a.vehicle_id);
            w.u32(a.component_id);
            w.u8(static_cast<uint8_t>(a.kind));
            w.u8(static_cast<uint8_t>(a.severity));
            w.u8(static_cast<uint8_t>(a.source));
            w.f32(a.score);
            break;
        }
        case MessageKind::response_action: {
            const auto& a = std::get<ResponseActionBody>(msg.body).action;
            if (a.rationale.size() > 255)
                throw std::length_error("encode: rationale exceeds 255 bytes");
            w.u64(msg.session_id);
            w.u8(static_cast<uint8_t>(a.kind));
            w.u32(a.component_id);
            w.u8(static_cast<uint8_t>(a.rationale.size()));
            w.bytes({reinterpret_cast<const uint8_t*>(a.rationale.data()), a.rationale.size()});
            break;
        }
        case MessageKind::disconnect:
            break;
    }
    if (payload.size() > 0xFFFFFFFFull) throw std::length_error("encode: body too large");

    std::vector<uint8_t> frame;
    frame.reserve(kFrameOverhead + payload.size());
    Writer f{frame};
    f.u8(kMagic0);
    f.u8(kMagic1);
    f.u8(msg.version);
    f.u8(static_cast<uint8_t>(kind));
    f.u32(static_cast<uint32_t>(payload.size()));
    f.bytes(payload);
    f.u32(crc32(payload));
    return frame;
}

DecodeResult decode(std::span<const uint8_t> frame) {
    DecodeResult res;
    if (frame.size() < kFrameOverhead) {
        res.detail = "truncated frame";
        return res;
    }
    if (frame[0] != kMagic0 || frame[1] != kMagic1) {
        res.detail = "bad magic";
        return res;
    }
    const uint8_t version = frame[2];
    if (version != kVersion) {
        res.detail = "unsupported version";
        return res;
    }
    uint32_t length = 0;
    for (int i = 0; i < 4; ++i) length = length << 8 | frame[4 + i];
    if (frame.size() != kFrameOverhead + length) {
        res.detail = "length mismatch";
        return res;
    }
    const std::span<const uint8_t> payload = frame.subspan(8, length);
    uint32_t stated_crc = 0;
    for (int i = 0; i < 4; ++i) stated_crc = stated_crc << 8 | frame[8 + length + i];
    if (crc32(payload) != stated_crc) {
        res.status = DecodeStatus::corruption;
        res.detail = "crc mismatch";
        return res;
    }
    const uint8_t kind_byte = frame[3];
    if (kind_byte < 0x01 || kind_byte > 0x09) {
        res.status = DecodeStatus::unsupported;
        res.detail = "unknown kind";
        return res;
    }

    Message msg;
    msg.version = version;
    Reader r{payload};
    bool ok = true;
    switch (static_cast<MessageKind>(kind_byte)) {
        case MessageKind::hello: {
            Hello h;
            h.vehicle_id = r.u64();
            h.oem_id = r.u32();
            if (!r.need(16)) {
                ok = false;
                break;
            }
            std::memcpy(h.token.data(), r.in.data() + r.pos, 16);
            r.pos += 16;
            msg.body = h;
            break;
        }
        case MessageKind::auth_ok:
            msg.session_id = r.u64();
            msg.body = AuthOk{};
            break;
        case MessageKind::ack:
            msg.session_id = r.u64();
            msg.body = Ack{};
            break;
        case MessageKind::log_batch: {
            msg.session_id = r.u64();
            const uint32_t count = r.u32();
            if (r.failed || !r.need(static_cast<size_t>(count) * 25)) {
                ok = false;
                break;
            }
            LogBatch b;
            b.records.resize(count);
            for (auto& rec : b.records) {
                if (!read_record(r, rec)) {
                    ok = false;
                    break;
                }
            }
            msg.body = std::move(b);
            break;
        }
        case MessageKind::fl_params: {
            msg.session_id = r.u64();
            FlParams p;
            if (!read_params(r, p.params)) ok = false;
            msg.body = std::move(p);
            break;
        }
        case MessageKind::model_update: {
            msg.session_id = r.u64();
            ModelUpdate u;
            u.version = r.u32();
            const uint8_t which = r.u8();
            if (which == 0) {
                learn::CentralModel m;
                if (!read_central_model(r, m)) ok = false;
                u.model = std::move(m);
            } else if (which == 1) {
                learn::ModelParams p;
                if (!read_params(r, p)) ok = false;
                u.model = std::move(p);
            } else {
                ok = false;
            }
            msg.body = std::move(u);
            break;
        }
        case MessageKind::alert: {
            msg.session_id = r.u64();
            Alert a;
            a.vehicle_id = r.u64();
            a.component_id = r.u32();
            const uint8_t kind = r.u8();
            const uint8_t sev = r.u8();
            const uint8_t src = r.u8();
            a.score = r.f32();
            if (kind < 1 || kind > 5 || sev > 2 || src > 2) {
                ok = false;
                break;
            }
            a.kind = static_cast<AlertKind>(kind);
            a.severity = static_cast<Severity>(sev);
            a.source = static_cast<AlertSource>(src);
            msg.body = AlertBody{a};
            break;
        }
        case MessageKind::response_action: {
            msg.session_id = r.u64();
            ResponseAction a;
            const uint8_t kind = r.u8();
            a.component_id = r.u32();
            const uint8_t len = r.u8();
            if (kind < 1 || kind > 6 || !r.need(len)) {
                ok = false;
                break;
            }
            a.kind = static_cast<ActionKind>(kind);
            a.rationale.assign(reinterpret_cast<const char*>(r.in.data() + r.pos), len);
            r.pos += len;
            msg.body = ResponseActionBody{std::move(a)};
            break;
        }
        case MessageKind::disconnect:
            msg.body = Disconnect{};
            break;
    }
    if (!ok || r.failed || !r.done()) {
        res.status = DecodeStatus::protocol_error;
        res.detail = "malformed body";
        return res;
    }
    res.status = DecodeStatus::ok;
    res.message = std::move(msg);
    return res;
}

const char* to_string(MessageKind k) {
    switch (k) {
        case MessageKind::hello: return "HELLO";
        case MessageKind::auth_ok: return "AUTH_OK";
        case MessageKind::log_batch: return "LOG_BATCH";
        case MessageKind::fl_params: return "FL_PARAMS";
        case MessageKind::model_update: return "MODEL_UPDATE";
        case MessageKind::alert: return "ALERT";
        case MessageKind::response_action: return "RESPONSE_ACTION";
        case MessageKind::ack: return "ACK";
        case MessageKind::disconnect: return "DISCONNECT";
    }
    return "?";
}

const char* to_string(DecodeStatus s) {
    switch (s) {
        case DecodeStatus::ok: return "ok";
        case DecodeStatus::protocol_error: return "protocol_error";
        case DecodeStatus::corruption: return "corruption";
        case DecodeStatus::unsupported: return "unsupported";
    }
    return "?";
}

Message make_hello(uint64_t vehicle_id, uint32_t oem_id, const std::array<uint8_t, 16>& token) {
    Message m;
    m.body = Hello{vehicle_id, oem_id, token};
    return m;
}

Message make_auth_ok(uint64_t session) {
    Message m;
    m.session_id = session;
    m.body = AuthOk{};
    return m;
}

Message make_log_batch(uint64_t session, std::vector<LogRecord> records) {
    Message m;
    m.session_id = session;
    m.body = LogBatch{std::move(records)};
    return m;
}

Message make_fl_params(uint64_t session, learn::ModelParams params) {
    Message m;
    m.session_id = session;
    m.body = FlParams{std::move(params)};
    return m;
}

Message make_model_update(uint64_t session, uint32_t version,
                          std::variant<learn::CentralModel, learn::ModelParams> model) {
    Message m;
    m.session_id = session;
    m.body = ModelUpdate{version, std::move(model)};
    return m;
}

Message make_alert(uint64_t session, const Alert& alert) {
    Message m;
    m.session_id = session;
    m.body = AlertBody{alert};
    return m;
}

Message make_response_action(uint64_t session, const ResponseAction& action) {
    Message m;
    m.session_id = session;
    m.body = ResponseActionBody{action};
    return m;
}

Message make_ack(uint64_t session) {
    Message m;
    m.session_id = session;
    m.body = Ack{};
    return m;
}

Message make_disconnect() {
    Message m;
    m.body = Disconnect{};
    return m;
}

} // namespace evsoar::wire
