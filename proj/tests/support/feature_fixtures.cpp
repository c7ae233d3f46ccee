#include "feature_fixtures.hpp"

#include "contract_builder.hpp"
#include "sentinel/common/keccak.hpp"
#include "sentinel/evm/disassembler.hpp"

namespace sentinel::testing {

namespace {

CallSpec token(const char* sig, std::uint8_t tag = 1) {
  return CallSpec{CallKind::Call, fixed_address(tag), selector_of(sig)};
}

FunctionSpec pub(const char* sig, std::vector<CallSpec> calls = {}, bool branch = false) {
  return FunctionSpec{selector_of(sig), std::move(calls), 1, branch};
}

features::ImplementationFeatures counts(std::uint32_t func, std::uint32_t pub, std::uint32_t flash, double flash_ratio,
                                        std::uint32_t tok, double tok_ratio, std::uint32_t max_tok, double avg_tok,
                                        std::uint32_t delegate, std::uint32_t selfdestruct) {
  return {func, pub, flash, flash_ratio, tok, tok_ratio, max_tok, avg_tok, delegate, selfdestruct};
}

}  // namespace

std::vector<FeatureFixture> feature_fixtures() {
  std::vector<FeatureFixture> out;

  // 1: no dispatcher, no calls.
  out.push_back({"plain-storage", evm::assemble_text("PUSH1 0x01\nPUSH1 0x00\nSSTORE\nSTOP"),
                 counts(1, 0, 0, 0, 0, 0, 0, 0, 0, 0)});

  {  // 2: token calls {3, 1} across two public functions.
    ContractSpec s;
    s.publics = {pub("a()", {token("transfer(address,uint256)"), token("approve(address,uint256)"),
                             token("balanceOf(address)")}),
                 pub("b()", {token("transferFrom(address,address,uint256)")})};
    out.push_back({"token-3-1", build_runtime(s), counts(3, 2, 0, 0, 4, 1.0, 3, 2.0, 0, 0)});
  }
  {  // 3: one flashloan callback out of two public functions.
    ContractSpec s;
    s.publics = {pub("uniswapV2Call(address,uint256,uint256,bytes)"), pub("other()")};
    out.push_back({"flash-half", build_runtime(s), counts(3, 2, 1, 0.5, 0, 0, 0, 0, 0, 0)});
  }
  {  // 4: two DELEGATECALLs plus DELEGATECALL bytes hidden in PUSH data.
    ContractSpec s;
    s.hide_opcodes_in_push = true;
    s.fallback_calls = {CallSpec{CallKind::DelegateCall, fixed_address(9)}, CallSpec{CallKind::DelegateCall}};
    out.push_back({"delegate-2", build_runtime(s), counts(1, 0, 0, 0, 0, 0, 0, 0, 2, 0)});
  }
  {  // 5: one SELFDESTRUCT in a public function, more hidden in PUSH32 data.
    ContractSpec s;
    s.hide_opcodes_in_push = true;
    s.publics = {pub("kill()", {CallSpec{CallKind::SelfDestruct}})};
    out.push_back({"selfdestruct-1", build_runtime(s), counts(2, 1, 0, 0, 0, 0, 0, 0, 0, 1)});
  }
  {  // 6: shared private helper with two token calls; a() adds one more.
    ContractSpec s;
    const CallSpec helper{CallKind::Private, std::nullopt, std::nullopt, 0};
    s.privates = {{token("transfer(address,uint256)", 2), token("balanceOf(address)", 2)}};
    s.publics = {pub("a()", {helper, token("approve(address,uint256)")}), pub("b()", {helper}), pub("c()")};
    out.push_back({"private-helper", build_runtime(s), counts(5, 3, 0, 0, 3, 1.0, 3, 5.0 / 3.0, 0, 0)});
  }
  {  // 7: one token call among two external calls.
    ContractSpec s;
    s.publics = {pub("a()", {token("foo()"), token("transfer(address,uint256)")})};
    out.push_back({"token-ratio", build_runtime(s), counts(2, 1, 0, 0, 1, 0.5, 1, 1.0, 0, 0)});
  }
  {  // 8: token selector with the target taken from calldata.
    ContractSpec s;
    s.publics = {pub("a()", {CallSpec{CallKind::Call, std::nullopt, selector_of("transfer(address,uint256)")}})};
    out.push_back({"dynamic-target", build_runtime(s), counts(2, 1, 0, 0, 1, 1.0, 1, 1.0, 0, 0)});
  }
  {  // 9: raw call without calldata selector.
    ContractSpec s;
    s.publics = {pub("a()", {CallSpec{CallKind::Call, fixed_address(3)}})};
    out.push_back({"raw-call", build_runtime(s), counts(2, 1, 0, 0, 0, 0, 0, 0, 0, 0)});
  }
  {  // 10: two flashloan callbacks out of three; branchy token calls; CREATE in fallback.
    ContractSpec s;
    s.fallback_calls = {CallSpec{CallKind::Create}};
    s.publics = {pub("onFlashLoan(address,address,uint256,uint256,bytes)",
                     {token("transfer(address,uint256)"), token("swap(uint256,uint256,address,bytes)")}, true),
                 pub("receiveFlashLoan(address[],uint256[],uint256[],bytes)"), pub("owner()")};
    out.push_back({"flash-branchy", build_runtime(s), counts(4, 3, 2, 2.0 / 3.0, 2, 1.0, 2, 2.0 / 3.0, 0, 0)});
  }
  return out;
}

}  // namespace sentinel::testing
