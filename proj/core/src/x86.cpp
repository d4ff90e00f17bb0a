#include "opd/x86.hpp"

#include <array>

namespace opd::x86 {
namespace {

// Immediate / relative operand that follows ModRM (or the opcode).
enum class Imm : std::uint8_t {
  none,
  ib,    // 8-bit immediate or rel8
  iw,    // 16-bit
  iz,    // 16 with operand-size prefix, else 32 (also rel16/32)
  iw_ib, // enter
  ap,    // far pointer: 16:16 or 16:32
  moffs, // 16 with address-size prefix, else 32
};

enum class Group : std::uint8_t { none, g1, g1a, g2, g3, g4, g5, g11 };

struct OneByte {
  const char* name = nullptr;
  bool modrm = false;
  Imm imm = Imm::none;
  Group group = Group::none;
  bool mem_only = false;
  bool prefix = false;
};

using Table256 = std::array<OneByte, 256>;

constexpr const char* kJcc[16] = {"jo", "jno", "jb", "jnb", "jz", "jnz", "jbe", "ja",
                                  "js", "jns", "jp", "jnp", "jl", "jge", "jle", "jg"};
constexpr const char* kSetcc[16] = {"seto", "setno", "setb", "setnb", "setz", "setnz", "setbe", "setnbe",
                                    "sets", "setns", "setp", "setnp", "setl", "setnl", "setle", "setnle"};
constexpr const char* kCmovcc[16] = {"cmovo", "cmovno", "cmovb", "cmovnb", "cmovz", "cmovnz",
                                     "cmovbe", "cmova", "cmovs", "cmovns", "cmovp", "cmovnp",
                                     "cmovl", "cmovge", "cmovle", "cmovg"};
constexpr const char* kGroup1[8] = {"add", "or", "adc", "sbb", "and", "sub", "xor", "cmp"};
constexpr const char* kGroup2[8] = {"rol", "ror", "rcl", "rcr", "shl", "shr", "sal", "sar"};
constexpr const char* kGroup3[8] = {"test", "test", "not", "neg", "mul", "imul", "div", "idiv"};
constexpr const char* kGroup5[8] = {"inc", "dec", "call", "call", "jmp", "jmp", "push", nullptr};

Table256 build_one_byte() {
  Table256 t{};
  auto set = [&](int op, const char* name, bool modrm = false, Imm imm = Imm::none) {
    t[static_cast<std::size_t>(op)] = OneByte{name, modrm, imm};
  };
  // The eight classic ALU rows: Eb,Gb / Ev,Gv / Gb,Eb / Gv,Ev / AL,Ib / eAX,Iz.
  const char* alu[8] = {"add", "or", "adc", "sbb", "and", "sub", "xor", "cmp"};
  for (int row = 0; row < 8; ++row) {
    const int base = row * 8;
    for (int k = 0; k < 4; ++k) set(base + k, alu[row], true);
    set(base + 4, alu[row], false, Imm::ib);
    set(base + 5, alu[row], false, Imm::iz);
  }
  set(0x06, "push"); set(0x07, "pop");
  set(0x0E, "push");
  set(0x16, "push"); set(0x17, "pop");
  set(0x1E, "push"); set(0x1F, "pop");
  set(0x27, "daa"); set(0x2F, "das"); set(0x37, "aaa"); set(0x3F, "aas");
  for (int op : {0x26, 0x2E, 0x36, 0x3E, 0x64, 0x65, 0x66, 0x67, 0xF0, 0xF2, 0xF3}) {
    t[static_cast<std::size_t>(op)].prefix = true;
  }
  for (int r = 0; r < 8; ++r) {
    set(0x40 + r, "inc");
    set(0x48 + r, "dec");
    set(0x50 + r, "push");
    set(0x58 + r, "pop");
    if (r > 0) set(0x90 + r, "xchg");
    set(0xB0 + r, "mov", false, Imm::ib);
    set(0xB8 + r, "mov", false, Imm::iz);
  }
  set(0x60, "pusha"); set(0x61, "popa");
  set(0x62, "bound", true); t[0x62].mem_only = true;
  set(0x63, "arpl", true);
  set(0x68, "push", false, Imm::iz);
  set(0x69, "imul", true, Imm::iz);
  set(0x6A, "push", false, Imm::ib);
  set(0x6B, "imul", true, Imm::ib);
  set(0x6C, "ins"); set(0x6D, "ins"); set(0x6E, "outs"); set(0x6F, "outs");
  for (int c = 0; c < 16; ++c) set(0x70 + c, kJcc[c], false, Imm::ib);
  set(0x80, nullptr, true, Imm::ib); t[0x80].group = Group::g1;
  set(0x81, nullptr, true, Imm::iz); t[0x81].group = Group::g1;
  set(0x82, nullptr, true, Imm::ib); t[0x82].group = Group::g1;
  set(0x83, nullptr, true, Imm::ib); t[0x83].group = Group::g1;
  set(0x84, "test", true); set(0x85, "test", true);
  set(0x86, "xchg", true); set(0x87, "xchg", true);
  for (int op = 0x88; op <= 0x8C; ++op) set(op, "mov", true);
  set(0x8D, "lea", true); t[0x8D].mem_only = true;
  set(0x8E, "mov", true);
  set(0x8F, nullptr, true); t[0x8F].group = Group::g1a;
  set(0x90, "nop");
  set(0x98, "cwde"); set(0x99, "cdq");
  set(0x9A, "call", false, Imm::ap);
  set(0x9B, "wait");
  set(0x9C, "pushf"); set(0x9D, "popf"); set(0x9E, "sahf"); set(0x9F, "lahf");
  for (int op = 0xA0; op <= 0xA3; ++op) set(op, "mov", false, Imm::moffs);
  set(0xA4, "movs"); set(0xA5, "movs"); set(0xA6, "cmps"); set(0xA7, "cmps");
  set(0xA8, "test", false, Imm::ib); set(0xA9, "test", false, Imm::iz);
  set(0xAA, "stos"); set(0xAB, "stos"); set(0xAC, "lods"); set(0xAD, "lods");
  set(0xAE, "scas"); set(0xAF, "scas");
  set(0xC0, nullptr, true, Imm::ib); t[0xC0].group = Group::g2;
  set(0xC1, nullptr, true, Imm::ib); t[0xC1].group = Group::g2;
  set(0xC2, "ret", false, Imm::iw); set(0xC3, "ret");
  set(0xC4, "les", true); t[0xC4].mem_only = true;
  set(0xC5, "lds", true); t[0xC5].mem_only = true;
  set(0xC6, nullptr, true, Imm::ib); t[0xC6].group = Group::g11;
  set(0xC7, nullptr, true, Imm::iz); t[0xC7].group = Group::g11;
  set(0xC8, "enter", false, Imm::iw_ib); set(0xC9, "leave");
  set(0xCA, "retf", false, Imm::iw); set(0xCB, "retf");
  set(0xCC, "int3"); set(0xCD, "int", false, Imm::ib); set(0xCE, "into"); set(0xCF, "iret");
  for (int op = 0xD0; op <= 0xD3; ++op) {
    set(op, nullptr, true);
    t[static_cast<std::size_t>(op)].group = Group::g2;
  }
  set(0xD4, "aam", false, Imm::ib); set(0xD5, "aad", false, Imm::ib);
  set(0xD6, "salc"); set(0xD7, "xlat");
  set(0xE0, "loopne", false, Imm::ib); set(0xE1, "loope", false, Imm::ib);
  set(0xE2, "loop", false, Imm::ib); set(0xE3, "jecxz", false, Imm::ib);
  set(0xE4, "in", false, Imm::ib); set(0xE5, "in", false, Imm::ib);
  set(0xE6, "out", false, Imm::ib); set(0xE7, "out", false, Imm::ib);
  set(0xE8, "call", false, Imm::iz); set(0xE9, "jmp", false, Imm::iz);
  set(0xEA, "jmp", false, Imm::ap); set(0xEB, "jmp", false, Imm::ib);
  set(0xEC, "in"); set(0xED, "in"); set(0xEE, "out"); set(0xEF, "out");
  set(0xF1, "int1"); set(0xF4, "hlt"); set(0xF5, "cmc");
  set(0xF6, nullptr, true); t[0xF6].group = Group::g3;
  set(0xF7, nullptr, true); t[0xF7].group = Group::g3;
  set(0xF8, "clc"); set(0xF9, "stc"); set(0xFA, "cli"); set(0xFB, "sti");
  set(0xFC, "cld"); set(0xFD, "std");
  set(0xFE, nullptr, true); t[0xFE].group = Group::g4;
  set(0xFF, nullptr, true); t[0xFF].group = Group::g5;
  return t;
}

const Table256& one_byte() {
  static const Table256 table = build_one_byte();
  return table;
}

// Two- and three-byte maps. names[] is indexed by mandatory prefix:
// 0 = none, 1 = 66, 2 = F3, 3 = F2. `any_prefix` entries ignore prefixes.
struct MultiByte {
  std::array<const char*, 4> names{};
  bool modrm = false;
  Imm imm = Imm::none;
  bool any_prefix = false;
  bool sse = false;
  bool mem_only = false;
  bool reg_only = false;
  std::uint8_t special = 0;  // nonzero: resolved by decode_two_byte_special
};

using MultiTable = std::array<MultiByte, 256>;

enum Special : std::uint8_t {
  sp_none = 0,
  sp_grp6,
  sp_grp7,
  sp_prefetch,
  sp_prefetch_amd,
  sp_movlps,
  sp_movhps,
  sp_grp12,
  sp_grp13,
  sp_grp14,
  sp_grp15,
  sp_grp8,
  sp_grp9,
};

MultiTable build_two_byte() {
  MultiTable t{};
  auto gp = [&](int op, const char* name, bool modrm = false, Imm imm = Imm::none) {
    auto& e = t[static_cast<std::size_t>(op)];
    e.names = {name, name, name, name};
    e.modrm = modrm;
    e.imm = imm;
    e.any_prefix = true;
  };
  auto sse = [&](int op, const char* none, const char* p66, const char* f3, const char* f2,
                 Imm imm = Imm::none) {
    auto& e = t[static_cast<std::size_t>(op)];
    e.names = {none, p66, f3, f2};
    e.modrm = true;
    e.imm = imm;
    e.sse = true;
  };
  auto special = [&](int op, std::uint8_t sp, Imm imm = Imm::none, bool is_sse = false) {
    auto& e = t[static_cast<std::size_t>(op)];
    e.modrm = true;
    e.imm = imm;
    e.special = sp;
    e.any_prefix = !is_sse;
    e.sse = is_sse;
  };

  special(0x00, sp_grp6);
  special(0x01, sp_grp7);
  gp(0x02, "lar", true); gp(0x03, "lsl", true);
  gp(0x05, "syscall"); gp(0x06, "clts"); gp(0x07, "sysret");
  gp(0x08, "invd"); gp(0x09, "wbinvd"); gp(0x0B, "ud2");
  special(0x0D, sp_prefetch_amd);
  gp(0x0E, "femms");
  sse(0x10, "movups", "movupd", "movss", "movsd");
  sse(0x11, "movups", "movupd", "movss", "movsd");
  special(0x12, sp_movlps, Imm::none, true);
  sse(0x13, "movlps", "movlpd", nullptr, nullptr); t[0x13].mem_only = true;
  sse(0x14, "unpcklps", "unpcklpd", nullptr, nullptr);
  sse(0x15, "unpckhps", "unpckhpd", nullptr, nullptr);
  special(0x16, sp_movhps, Imm::none, true);
  sse(0x17, "movhps", "movhpd", nullptr, nullptr); t[0x17].mem_only = true;
  special(0x18, sp_prefetch);
  for (int op = 0x19; op <= 0x1F; ++op) gp(op, "nop", true);
  for (int op = 0x20; op <= 0x23; ++op) gp(op, "mov", true);
  sse(0x28, "movaps", "movapd", nullptr, nullptr);
  sse(0x29, "movaps", "movapd", nullptr, nullptr);
  sse(0x2A, "cvtpi2ps", "cvtpi2pd", "cvtsi2ss", "cvtsi2sd");
  sse(0x2B, "movntps", "movntpd", nullptr, nullptr); t[0x2B].mem_only = true;
  sse(0x2C, "cvttps2pi", "cvttpd2pi", "cvttss2si", "cvttsd2si");
  sse(0x2D, "cvtps2pi", "cvtpd2pi", "cvtss2si", "cvtsd2si");
  sse(0x2E, "ucomiss", "ucomisd", nullptr, nullptr);
  sse(0x2F, "comiss", "comisd", nullptr, nullptr);
  gp(0x30, "wrmsr"); gp(0x31, "rdtsc"); gp(0x32, "rdmsr"); gp(0x33, "rdpmc");
  gp(0x34, "sysenter"); gp(0x35, "sysexit"); gp(0x37, "getsec");
  for (int c = 0; c < 16; ++c) gp(0x40 + c, kCmovcc[c], true);
  sse(0x50, "movmskps", "movmskpd", nullptr, nullptr); t[0x50].reg_only = true;
  sse(0x51, "sqrtps", "sqrtpd", "sqrtss", "sqrtsd");
  sse(0x52, "rsqrtps", nullptr, "rsqrtss", nullptr);
  sse(0x53, "rcpps", nullptr, "rcpss", nullptr);
  sse(0x54, "andps", "andpd", nullptr, nullptr);
  sse(0x55, "andnps", "andnpd", nullptr, nullptr);
  sse(0x56, "orps", "orpd", nullptr, nullptr);
  sse(0x57, "xorps", "xorpd", nullptr, nullptr);
  sse(0x58, "addps", "addpd", "addss", "addsd");
  sse(0x59, "mulps", "mulpd", "mulss", "mulsd");
  sse(0x5A, "cvtps2pd", "cvtpd2ps", "cvtss2sd", "cvtsd2ss");
  sse(0x5B, "cvtdq2ps", "cvtps2dq", "cvttps2dq", nullptr);
  sse(0x5C, "subps", "subpd", "subss", "subsd");
  sse(0x5D, "minps", "minpd", "minss", "minsd");
  sse(0x5E, "divps", "divpd", "divss", "divsd");
  sse(0x5F, "maxps", "maxpd", "maxss", "maxsd");
  const char* mmx60[12] = {"punpcklbw", "punpcklwd", "punpckldq", "packsswb", "pcmpgtb", "pcmpgtw",
                           "pcmpgtd", "packuswb", "punpckhbw", "punpckhwd", "punpckhdq", "packssdw"};
  for (int k = 0; k < 12; ++k) sse(0x60 + k, mmx60[k], mmx60[k], nullptr, nullptr);
  sse(0x6C, nullptr, "punpcklqdq", nullptr, nullptr);
  sse(0x6D, nullptr, "punpckhqdq", nullptr, nullptr);
  sse(0x6E, "movd", "movd", nullptr, nullptr);
  sse(0x6F, "movq", "movdqa", "movdqu", nullptr);
  sse(0x70, "pshufw", "pshufd", "pshufhw", "pshuflw", Imm::ib);
  special(0x71, sp_grp12, Imm::ib, true);
  special(0x72, sp_grp13, Imm::ib, true);
  special(0x73, sp_grp14, Imm::ib, true);
  sse(0x74, "pcmpeqb", "pcmpeqb", nullptr, nullptr);
  sse(0x75, "pcmpeqw", "pcmpeqw", nullptr, nullptr);
  sse(0x76, "pcmpeqd", "pcmpeqd", nullptr, nullptr);
  gp(0x77, "emms");
  gp(0x78, "vmread", true); gp(0x79, "vmwrite", true);
  sse(0x7C, nullptr, "haddpd", nullptr, "haddps");
  sse(0x7D, nullptr, "hsubpd", nullptr, "hsubps");
  sse(0x7E, "movd", "movd", "movq", nullptr);
  sse(0x7F, "movq", "movdqa", "movdqu", nullptr);
  for (int c = 0; c < 16; ++c) gp(0x80 + c, kJcc[c], false, Imm::iz);
  for (int c = 0; c < 16; ++c) gp(0x90 + c, kSetcc[c], true);
  gp(0xA0, "push"); gp(0xA1, "pop"); gp(0xA2, "cpuid");
  gp(0xA3, "bt", true);
  gp(0xA4, "shld", true, Imm::ib); gp(0xA5, "shld", true);
  gp(0xA8, "push"); gp(0xA9, "pop"); gp(0xAA, "rsm");
  gp(0xAB, "bts", true);
  gp(0xAC, "shrd", true, Imm::ib); gp(0xAD, "shrd", true);
  special(0xAE, sp_grp15);
  gp(0xAF, "imul", true);
  gp(0xB0, "cmpxchg", true); gp(0xB1, "cmpxchg", true);
  gp(0xB2, "lss", true); t[0xB2].mem_only = true;
  gp(0xB3, "btr", true);
  gp(0xB4, "lfs", true); t[0xB4].mem_only = true;
  gp(0xB5, "lgs", true); t[0xB5].mem_only = true;
  gp(0xB6, "movzx", true); gp(0xB7, "movzx", true);
  {
    auto& e = t[0xB8];
    e.names = {nullptr, nullptr, "popcnt", nullptr};
    e.modrm = true;
  }
  gp(0xB9, "ud1", true);
  special(0xBA, sp_grp8, Imm::ib);
  gp(0xBB, "btc", true);
  {
    auto& e = t[0xBC];
    e.names = {"bsf", "bsf", "tzcnt", "bsf"};
    e.modrm = true;
    auto& f = t[0xBD];
    f.names = {"bsr", "bsr", "lzcnt", "bsr"};
    f.modrm = true;
  }
  gp(0xBE, "movsx", true); gp(0xBF, "movsx", true);
  gp(0xC0, "xadd", true); gp(0xC1, "xadd", true);
  sse(0xC2, "cmpps", "cmppd", "cmpss", "cmpsd", Imm::ib);
  gp(0xC3, "movnti", true); t[0xC3].mem_only = true;
  sse(0xC4, "pinsrw", "pinsrw", nullptr, nullptr, Imm::ib);
  sse(0xC5, "pextrw", "pextrw", nullptr, nullptr, Imm::ib); t[0xC5].reg_only = true;
  sse(0xC6, "shufps", "shufpd", nullptr, nullptr, Imm::ib);
  special(0xC7, sp_grp9);
  for (int r = 0; r < 8; ++r) gp(0xC8 + r, "bswap");
  sse(0xD0, nullptr, "addsubpd", nullptr, "addsubps");
  const char* mmxD1[15] = {"psrlw", "psrld", "psrlq", "paddq", "pmullw", nullptr, "pmovmskb", "psubusb",
                           "psubusw", "pminub", "pand", "paddusb", "paddusw", "pmaxub", "pandn"};
  for (int k = 0; k < 15; ++k) {
    if (mmxD1[k]) sse(0xD1 + k, mmxD1[k], mmxD1[k], nullptr, nullptr);
  }
  t[0xD7].reg_only = true;
  sse(0xD6, nullptr, "movq", "movq2dq", "movdq2q");
  const char* mmxE0[16] = {"pavgb", "psraw", "psrad", "pavgw", "pmulhuw", "pmulhw", nullptr, nullptr,
                           "psubsb", "psubsw", "pminsw", "por", "paddsb", "paddsw", "pmaxsw", "pxor"};
  for (int k = 0; k < 16; ++k) {
    if (mmxE0[k]) sse(0xE0 + k, mmxE0[k], mmxE0[k], nullptr, nullptr);
  }
  sse(0xE6, nullptr, "cvttpd2dq", "cvtdq2pd", "cvtpd2dq");
  sse(0xE7, "movntq", "movntdq", nullptr, nullptr); t[0xE7].mem_only = true;
  sse(0xF0, nullptr, nullptr, nullptr, "lddqu"); t[0xF0].mem_only = true;
  const char* mmxF1[14] = {"psllw", "pslld", "psllq", "pmuludq", "pmaddwd", "psadbw", "maskmovq",
                           "psubb", "psubw", "psubd", "psubq", "paddb", "paddw", "paddd"};
  for (int k = 0; k < 14; ++k) sse(0xF1 + k, mmxF1[k], mmxF1[k], nullptr, nullptr);
  t[0xF7].names[1] = "maskmovdqu";
  t[0xF7].reg_only = true;
  gp(0xFF, "ud0", true);
  return t;
}

MultiTable build_0f38() {
  MultiTable t{};
  auto both = [&](int op, const char* name) {
    auto& e = t[static_cast<std::size_t>(op)];
    e.names = {name, name, nullptr, nullptr};
    e.modrm = true;
    e.sse = true;
  };
  auto p66 = [&](int op, const char* name) {
    auto& e = t[static_cast<std::size_t>(op)];
    e.names = {nullptr, name, nullptr, nullptr};
    e.modrm = true;
    e.sse = true;
  };
  const char* ssse3[12] = {"pshufb", "phaddw", "phaddd", "phaddsw", "pmaddubsw", "phsubw",
                           "phsubd", "phsubsw", "psignb", "psignw", "psignd", "pmulhrsw"};
  for (int k = 0; k < 12; ++k) both(k, ssse3[k]);
  both(0x1C, "pabsb"); both(0x1D, "pabsw"); both(0x1E, "pabsd");
  p66(0x10, "pblendvb"); p66(0x14, "blendvps"); p66(0x15, "blendvpd"); p66(0x17, "ptest");
  const char* sx[6] = {"pmovsxbw", "pmovsxbd", "pmovsxbq", "pmovsxwd", "pmovsxwq", "pmovsxdq"};
  const char* zx[6] = {"pmovzxbw", "pmovzxbd", "pmovzxbq", "pmovzxwd", "pmovzxwq", "pmovzxdq"};
  for (int k = 0; k < 6; ++k) {
    p66(0x20 + k, sx[k]);
    p66(0x30 + k, zx[k]);
  }
  p66(0x28, "pmuldq"); p66(0x29, "pcmpeqq"); p66(0x2A, "movntdqa"); p66(0x2B, "packusdw");
  p66(0x37, "pcmpgtq");
  const char* minmax[8] = {"pminsb", "pminsd", "pminuw", "pminud", "pmaxsb", "pmaxsd", "pmaxuw", "pmaxud"};
  for (int k = 0; k < 8; ++k) p66(0x38 + k, minmax[k]);
  p66(0x40, "pmulld"); p66(0x41, "phminposuw");
  p66(0xDB, "aesimc"); p66(0xDC, "aesenc"); p66(0xDD, "aesenclast"); p66(0xDE, "aesdec"); p66(0xDF, "aesdeclast");
  for (int op : {0xF0, 0xF1}) {
    auto& e = t[static_cast<std::size_t>(op)];
    e.names = {"movbe", "movbe", nullptr, "crc32"};
    e.modrm = true;
  }
  return t;
}

MultiTable build_0f3a() {
  MultiTable t{};
  auto p66 = [&](int op, const char* name) {
    auto& e = t[static_cast<std::size_t>(op)];
    e.names = {nullptr, name, nullptr, nullptr};
    e.modrm = true;
    e.imm = Imm::ib;
    e.sse = true;
  };
  p66(0x08, "roundps"); p66(0x09, "roundpd"); p66(0x0A, "roundss"); p66(0x0B, "roundsd");
  p66(0x0C, "blendps"); p66(0x0D, "blendpd"); p66(0x0E, "pblendw");
  t[0x0F].names = {"palignr", "palignr", nullptr, nullptr};
  t[0x0F].modrm = true;
  t[0x0F].imm = Imm::ib;
  t[0x0F].sse = true;
  p66(0x14, "pextrb"); p66(0x15, "pextrw"); p66(0x16, "pextrd"); p66(0x17, "extractps");
  p66(0x20, "pinsrb"); p66(0x21, "insertps"); p66(0x22, "pinsrd");
  p66(0x40, "dpps"); p66(0x41, "dppd"); p66(0x42, "mpsadbw"); p66(0x44, "pclmulqdq");
  p66(0x60, "pcmpestrm"); p66(0x61, "pcmpestri"); p66(0x62, "pcmpistrm"); p66(0x63, "pcmpistri");
  p66(0xDF, "aeskeygenassist");
  return t;
}

const MultiTable& two_byte() {
  static const MultiTable table = build_two_byte();
  return table;
}
const MultiTable& map_0f38() {
  static const MultiTable table = build_0f38();
  return table;
}
const MultiTable& map_0f3a() {
  static const MultiTable table = build_0f3a();
  return table;
}

// x87 escape opcodes D8..DF. Memory forms are named by ModRM.reg; register
// forms (mod == 3) by the full ModRM byte.
constexpr const char* kX87Mem[8][8] = {
    {"fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"},
    {"fld", nullptr, "fst", "fstp", "fldenv", "fldcw", "fnstenv", "fnstcw"},
    {"fiadd", "fimul", "ficom", "ficomp", "fisub", "fisubr", "fidiv", "fidivr"},
    {"fild", "fisttp", "fist", "fistp", nullptr, "fld", nullptr, "fstp"},
    {"fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"},
    {"fld", "fisttp", "fst", "fstp", "frstor", nullptr, "fnsave", "fnstsw"},
    {"fiadd", "fimul", "ficom", "ficomp", "fisub", "fisubr", "fidiv", "fidivr"},
    {"fild", "fisttp", "fist", "fistp", "fbld", "fild", "fbstp", "fistp"},
};

const char* x87_register_form(std::uint8_t escape, std::uint8_t modrm) {
  const int reg = (modrm >> 3) & 7;
  switch (escape) {
    case 0xD8: {
      constexpr const char* n[8] = {"fadd", "fmul", "fcom", "fcomp", "fsub", "fsubr", "fdiv", "fdivr"};
      return n[reg];
    }
    case 0xD9: {
      if (modrm < 0xC8) return "fld";
      if (modrm < 0xD0) return "fxch";
      if (modrm == 0xD0) return "fnop";
      if (modrm >= 0xD8 && modrm < 0xE0) return "fstp";
      constexpr const char* n[32] = {"fchs", "fabs", nullptr, nullptr, "ftst", "fxam", nullptr, nullptr,
                                     "fld1", "fldl2t", "fldl2e", "fldpi", "fldlg2", "fldln2", "fldz", nullptr,
                                     "f2xm1", "fyl2x", "fptan", "fpatan", "fxtract", "fprem1", "fdecstp", "fincstp",
                                     "fprem", "fyl2xp1", "fsqrt", "fsincos", "frndint", "fscale", "fsin", "fcos"};
      if (modrm >= 0xE0) return n[modrm - 0xE0];
      return nullptr;
    }
    case 0xDA: {
      constexpr const char* n[4] = {"fcmovb", "fcmove", "fcmovbe", "fcmovu"};
      if (modrm < 0xE0) return n[reg];
      if (modrm == 0xE9) return "fucompp";
      return nullptr;
    }
    case 0xDB: {
      constexpr const char* n[4] = {"fcmovnb", "fcmovne", "fcmovnbe", "fcmovnu"};
      if (modrm < 0xE0) return n[reg];
      switch (modrm) {
        case 0xE0: return "fneni";
        case 0xE1: return "fndisi";
        case 0xE2: return "fnclex";
        case 0xE3: return "fninit";
        case 0xE4: return "fnsetpm";
        default: break;
      }
      if (modrm >= 0xE8 && modrm < 0xF0) return "fucomi";
      if (modrm >= 0xF0 && modrm < 0xF8) return "fcomi";
      return nullptr;
    }
    case 0xDC: {
      constexpr const char* n[8] = {"fadd", "fmul", "fcom", "fcomp", "fsubr", "fsub", "fdivr", "fdiv"};
      return n[reg];
    }
    case 0xDD: {
      constexpr const char* n[8] = {"ffree", "fxch", "fst", "fstp", "fucom", "fucomp", nullptr, nullptr};
      return n[reg];
    }
    case 0xDE: {
      if (reg == 3) return modrm == 0xD9 ? "fcompp" : nullptr;
      constexpr const char* n[8] = {"faddp", "fmulp", "fcomp", nullptr, "fsubrp", "fsubp", "fdivrp", "fdivp"};
      return n[reg];
    }
    case 0xDF: {
      if (reg == 4) return modrm == 0xE0 ? "fnstsw" : nullptr;
      constexpr const char* n[8] = {"ffreep", "fxch", "fstp", "fstp", nullptr, "fucomip", "fcomip", nullptr};
      return n[reg];
    }
    default:
      return nullptr;
  }
}

struct Prefixes {
  bool opsize = false;
  bool addrsize = false;
  bool rep = false;    // F3
  bool repne = false;  // F2
  int last_rep = 0;    // 0, 0xF2 or 0xF3: whichever came last
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> code) : code_(code) {}

  bool has(std::size_t n) const noexcept { return pos_ + n <= code_.size() && pos_ + n <= 15; }
  std::uint8_t peek(std::size_t ahead = 0) const noexcept { return code_[pos_ + ahead]; }
  std::uint8_t take() noexcept { return code_[pos_++]; }
  bool skip(std::size_t n) noexcept {
    if (!has(n)) return false;
    pos_ += n;
    return true;
  }
  std::size_t pos() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> code_;
  std::size_t pos_ = 0;
};

// Consumes SIB and displacement following an already-read ModRM byte.
bool skip_address(Reader& r, std::uint8_t modrm, bool addr16) {
  const int mod = modrm >> 6;
  const int rm = modrm & 7;
  if (mod == 3) return true;
  if (addr16) {
    if (mod == 0) return rm == 6 ? r.skip(2) : true;
    return r.skip(mod == 1 ? 1 : 2);
  }
  if (rm == 4) {
    if (!r.has(1)) return false;
    const std::uint8_t sib = r.take();
    if (mod == 0 && (sib & 7) == 5) return r.skip(4);
  } else if (mod == 0 && rm == 5) {
    return r.skip(4);
  }
  if (mod == 1) return r.skip(1);
  if (mod == 2) return r.skip(4);
  return true;
}

bool skip_imm(Reader& r, Imm imm, const Prefixes& p) {
  switch (imm) {
    case Imm::none: return true;
    case Imm::ib: return r.skip(1);
    case Imm::iw: return r.skip(2);
    case Imm::iz: return r.skip(p.opsize ? 2 : 4);
    case Imm::iw_ib: return r.skip(3);
    case Imm::ap: return r.skip(p.opsize ? 4 : 6);
    case Imm::moffs: return r.skip(p.addrsize ? 2 : 4);
  }
  return false;
}

std::optional<Instruction> finish(const char* name, const Reader& r) {
  if (name == nullptr) return std::nullopt;
  return Instruction{name, static_cast<std::uint8_t>(r.pos())};
}

const char* group_name(Group g, std::uint8_t op, std::uint8_t modrm, Imm& imm) {
  const int reg = (modrm >> 3) & 7;
  const bool mem = (modrm >> 6) != 3;
  switch (g) {
    case Group::g1: return kGroup1[reg];
    case Group::g1a: return reg == 0 ? "pop" : nullptr;
    case Group::g2: return kGroup2[reg];
    case Group::g3:
      if (reg < 2) imm = op == 0xF6 ? Imm::ib : Imm::iz;
      return kGroup3[reg];
    case Group::g4: return reg == 0 ? "inc" : reg == 1 ? "dec" : nullptr;
    case Group::g5:
      if ((reg == 3 || reg == 5) && !mem) return nullptr;
      return kGroup5[reg];
    case Group::g11: return reg == 0 ? "mov" : nullptr;
    case Group::none: break;
  }
  return nullptr;
}

const char* pick_prefixed(const MultiByte& e, const Prefixes& p) {
  if (e.any_prefix) return e.names[0];
  if (p.last_rep == 0xF2 && e.names[3]) return e.names[3];
  if (p.last_rep == 0xF3 && e.names[2]) return e.names[2];
  if (p.last_rep != 0) {
    // A rep prefix the entry does not define makes the encoding invalid,
    // except where the entry has no prefixed forms at all.
    if (e.names[1] || e.names[2] || e.names[3]) return nullptr;
  }
  if (p.opsize) return e.names[1];
  return e.names[0];
}

const char* special_two_byte(std::uint8_t special, std::uint8_t modrm, const Prefixes& p) {
  const int mod = modrm >> 6;
  const int reg = (modrm >> 3) & 7;
  const bool mem = mod != 3;
  switch (special) {
    case sp_grp6: {
      constexpr const char* n[8] = {"sldt", "str", "lldt", "ltr", "verr", "verw", nullptr, nullptr};
      return n[reg];
    }
    case sp_grp7: {
      if (!mem) {
        switch (modrm) {
          case 0xC1: return "vmcall";
          case 0xC2: return "vmlaunch";
          case 0xC3: return "vmresume";
          case 0xC4: return "vmxoff";
          case 0xC8: return "monitor";
          case 0xC9: return "mwait";
          case 0xCA: return "clac";
          case 0xCB: return "stac";
          case 0xD0: return "xgetbv";
          case 0xD1: return "xsetbv";
          case 0xF9: return "rdtscp";
          default: break;
        }
        if (reg == 4) return "smsw";
        if (reg == 6) return "lmsw";
        return nullptr;
      }
      constexpr const char* n[8] = {"sgdt", "sidt", "lgdt", "lidt", "smsw", nullptr, "lmsw", "invlpg"};
      return n[reg];
    }
    case sp_prefetch: {
      if (mem && reg < 4) {
        constexpr const char* n[4] = {"prefetchnta", "prefetcht0", "prefetcht1", "prefetcht2"};
        return n[reg];
      }
      return "nop";
    }
    case sp_prefetch_amd:
      return reg == 1 ? "prefetchw" : "prefetch";
    case sp_movlps:
      if (p.last_rep == 0xF3) return "movsldup";
      if (p.last_rep == 0xF2) return "movddup";
      if (p.opsize) return mem ? "movlpd" : nullptr;
      return mem ? "movlps" : "movhlps";
    case sp_movhps:
      if (p.last_rep == 0xF3) return "movshdup";
      if (p.last_rep == 0xF2) return nullptr;
      if (p.opsize) return mem ? "movhpd" : nullptr;
      return mem ? "movhps" : "movlhps";
    case sp_grp12:
    case sp_grp13:
    case sp_grp14: {
      if (mem || p.last_rep != 0) return nullptr;
      if (special == sp_grp12) {
        constexpr const char* n[8] = {nullptr, nullptr, "psrlw", nullptr, "psraw", nullptr, "psllw", nullptr};
        return n[reg];
      }
      if (special == sp_grp13) {
        constexpr const char* n[8] = {nullptr, nullptr, "psrld", nullptr, "psrad", nullptr, "pslld", nullptr};
        return n[reg];
      }
      if (reg == 3) return p.opsize ? "psrldq" : nullptr;
      if (reg == 7) return p.opsize ? "pslldq" : nullptr;
      constexpr const char* n[8] = {nullptr, nullptr, "psrlq", nullptr, nullptr, nullptr, "psllq", nullptr};
      return n[reg];
    }
    case sp_grp15: {
      if (!mem) {
        constexpr const char* n[8] = {nullptr, nullptr, nullptr, nullptr, nullptr, "lfence", "mfence", "sfence"};
        return n[reg];
      }
      constexpr const char* n[8] = {"fxsave", "fxrstor", "ldmxcsr", "stmxcsr", "xsave", "xrstor", "xsaveopt",
                                    "clflush"};
      return n[reg];
    }
    case sp_grp8: {
      constexpr const char* n[8] = {nullptr, nullptr, nullptr, nullptr, "bt", "bts", "btr", "btc"};
      return n[reg];
    }
    case sp_grp9: {
      if (reg == 1) return mem ? "cmpxchg8b" : nullptr;
      if (reg == 6) return mem ? "vmptrld" : "rdrand";
      if (reg == 7) return mem ? "vmptrst" : "rdseed";
      return nullptr;
    }
    default:
      return nullptr;
  }
}

std::optional<Instruction> decode_multi(Reader& r, const MultiByte& e, const Prefixes& p,
                                        const DecoderProfile& profile) {
  if (e.sse && !profile.sse) return std::nullopt;
  if (e.names[0] == nullptr && e.names[1] == nullptr && e.names[2] == nullptr && e.names[3] == nullptr &&
      e.special == sp_none) {
    return std::nullopt;
  }
  std::uint8_t modrm = 0;
  if (e.modrm) {
    if (!r.has(1)) return std::nullopt;
    modrm = r.take();
    const bool mem = (modrm >> 6) != 3;
    if (e.mem_only && !mem) return std::nullopt;
    if (e.reg_only && mem) return std::nullopt;
    if (!skip_address(r, modrm, p.addrsize)) return std::nullopt;
  }
  const char* name = e.special != sp_none ? special_two_byte(e.special, modrm, p) : pick_prefixed(e, p);
  if (name == nullptr) return std::nullopt;
  if (!skip_imm(r, e.imm, p)) return std::nullopt;
  return finish(name, r);
}

std::optional<Instruction> decode_x87(Reader& r, std::uint8_t escape, const Prefixes& p) {
  if (!r.has(1)) return std::nullopt;
  const std::uint8_t modrm = r.take();
  const char* name = nullptr;
  if ((modrm >> 6) == 3) {
    name = x87_register_form(escape, modrm);
  } else {
    name = kX87Mem[escape - 0xD8][(modrm >> 3) & 7];
    if (!skip_address(r, modrm, p.addrsize)) return std::nullopt;
  }
  return finish(name, r);
}

const char* waiting_form(std::string_view no_wait) {
  if (no_wait == "fnstsw") return "fstsw";
  if (no_wait == "fnstcw") return "fstcw";
  if (no_wait == "fnstenv") return "fstenv";
  if (no_wait == "fnsave") return "fsave";
  if (no_wait == "fnclex") return "fclex";
  if (no_wait == "fninit") return "finit";
  return nullptr;
}

}  // namespace

std::optional<Instruction> decode(std::span<const std::uint8_t> code, const DecoderProfile& profile) {
  Reader r(code);
  Prefixes p;
  const auto& table = one_byte();
  for (;;) {
    if (!r.has(1)) return std::nullopt;
    const std::uint8_t b = r.peek();
    if (!table[b].prefix) break;
    r.take();
    switch (b) {
      case 0x66: p.opsize = true; break;
      case 0x67: p.addrsize = true; break;
      case 0xF2: p.repne = true; p.last_rep = 0xF2; break;
      case 0xF3: p.rep = true; p.last_rep = 0xF3; break;
      default: break;  // segment overrides and lock
    }
  }

  const std::uint8_t op = r.take();
  if (op == 0x0F) {
    if (!r.has(1)) return std::nullopt;
    const std::uint8_t op2 = r.take();
    if (op2 == 0x38 || op2 == 0x3A) {
      if (!r.has(1)) return std::nullopt;
      const std::uint8_t op3 = r.take();
      const auto& e = op2 == 0x38 ? map_0f38()[op3] : map_0f3a()[op3];
      return decode_multi(r, e, p, profile);
    }
    return decode_multi(r, two_byte()[op2], p, profile);
  }

  if (op >= 0xD8 && op <= 0xDF) {
    if (!profile.x87) return std::nullopt;
    return decode_x87(r, op, p);
  }

  if (op == 0x9B && profile.merge_fwait && profile.x87 && r.has(1)) {
    const std::uint8_t next = r.peek();
    if (next >= 0xD8 && next <= 0xDF) {
      Reader probe = r;
      probe.take();
      if (auto inner = decode_x87(probe, next, p)) {
        if (const char* merged = waiting_form(inner->mnemonic)) {
          return Instruction{merged, static_cast<std::uint8_t>(probe.pos())};
        }
      }
    }
  }

  const OneByte& e = table[op];
  const char* name = e.name;
  Imm imm = e.imm;
  if (e.modrm) {
    if (!r.has(1)) return std::nullopt;
    const std::uint8_t modrm = r.take();
    if (e.mem_only && (modrm >> 6) == 3) return std::nullopt;
    if (e.group != Group::none) name = group_name(e.group, op, modrm, imm);
    if (name == nullptr) return std::nullopt;
    if (!skip_address(r, modrm, p.addrsize)) return std::nullopt;
  }
  if (name == nullptr) return std::nullopt;
  switch (op) {
    case 0x90: if (p.rep) name = "pause"; break;
    case 0x98: if (p.opsize) name = "cbw"; break;
    case 0x99: if (p.opsize) name = "cwd"; break;
    case 0xE3: if (p.addrsize) name = "jcxz"; break;
    default: break;
  }
  if (!skip_imm(r, imm, p)) return std::nullopt;
  return finish(name, r);
}

void sweep(std::span<const std::uint8_t> code, const DecoderProfile& profile, SweepCounts& into) {
  std::size_t pos = 0;
  while (pos < code.size()) {
    if (auto insn = decode(code.subspan(pos), profile)) {
      ++into.counts[std::string(insn->mnemonic)];
      ++into.decoded_instructions;
      pos += insn->length;
    } else {
      ++into.unknown_bytes;
      ++pos;
    }
  }
}

}  // namespace opd::x86
