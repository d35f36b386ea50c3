"""Betting-game probability toolkit.

Forecasting and market game protocols with capital bookkeeping, capital
tests and implied alternatives, the conditional-ticket algebra behind
updating by conditioning, and the Dempster-Shafer belief calculus with its
combination rules.
"""

from .engine import (
    FORECASTING,
    MARKET,
    ForecastRound,
    GameTranscript,
    MarketRound,
    ProtocolError,
    ReplayReport,
    capital_update,
    parse_transcript,
    play_forecasting_game,
    play_market_game,
    read_transcript,
    replay_verify,
    safe_interval,
    transcript_to_text,
    write_transcript,
)
from .strategies import (
    REGISTRY,
    AllInSkeptic,
    BankruptingReality,
    BuyOnlySkeptic,
    ConstantForecaster,
    DistributionForecaster,
    FractionalSkeptic,
    IidReality,
    JointDistribution,
    LlnSkeptic,
    SequenceForecaster,
    SequenceReality,
    StrategyDescriptor,
    ZeroSkeptic,
    build_strategy,
    built_in_safe_skeptics,
    forecaster_from_distribution,
    reality_bankrupting,
    reality_iid,
    skeptic_fractional,
    skeptic_lln,
)
from .villetest import (
    ImpliedAlternative,
    InvalidTestError,
    MarkovBoundEstimate,
    VilleTestResult,
    enumerate_final_capitals,
    exact_exceedance_probability,
    implied_alternative,
    likelihood_ratio,
    markov_bound_estimate,
    ville_test,
)
from .conditioning import (
    CELLS,
    ConditioningScenario,
    NullEventError,
    OutcomeCell,
    PricePair,
    Ticket,
    TicketKind,
    TwoStageStrategy,
    added_ticket_block,
    compound_probability,
    conditional_price,
    definetti_portfolio,
    evaluate_payoff,
    payoff_table,
    transform_strategy,
)
from .belief import (
    BeliefFunction,
    Frame,
    MassFunction,
    MultivaluedMapping,
    SourceSpace,
    TotalConflictError,
    bel_value,
    belief_from_mapping,
    canonical_mapping,
    condition_mapping,
    dempster_combine_mappings,
    dempster_combine_masses,
    independent_combination,
    mass_from_belief,
    one_sided_betting_game,
    plausibility,
)

__version__ = "0.1.0"
