"""Marketplace: catalog, agreements, and the pull/push message broker."""

from .agreements import (
    Agreement,
    AgreementFilter,
    DeadLetter,
    DeliveryRecord,
    InactiveAgreementError,
    UnknownChannelError,
)
from .broker import Broker, PushTarget, SubscriptionQueue
from .catalog import (
    CATALOG_INDEX_RESOLUTION_DEG,
    CatalogEntry,
    CatalogFilter,
    cells_covering,
    fold_catalog,
    parse_catalog_filter,
)
from .reference import delivery_record_keys, replay_expected_deliveries
from .service import (
    IngestAck,
    InProcessVaultAccessor,
    MarketplaceService,
    PullBatch,
    VaultAccessor,
    VaultUnreachableError,
)

__all__ = [
    "Agreement",
    "AgreementFilter",
    "Broker",
    "CATALOG_INDEX_RESOLUTION_DEG",
    "CatalogEntry",
    "CatalogFilter",
    "DeadLetter",
    "DeliveryRecord",
    "InactiveAgreementError",
    "IngestAck",
    "InProcessVaultAccessor",
    "MarketplaceService",
    "PullBatch",
    "PushTarget",
    "SubscriptionQueue",
    "UnknownChannelError",
    "VaultAccessor",
    "VaultUnreachableError",
    "cells_covering",
    "delivery_record_keys",
    "fold_catalog",
    "parse_catalog_filter",
    "replay_expected_deliveries",
]
