use std::time::Duration;

use serde::{Deserialize, Serialize};
use ureq::Agent;

use crate::chem::Molecule;

use super::{PolicyBackend, PolicyError, RawProposal, RouteSample, RouteSampler};

/// Client for an external policy server speaking the JSON wire format
/// `POST /v1/propose` and `POST /v1/propose_route`.
#[derive(Clone)]
pub struct HttpPolicy {
    base_url: String,
    agent: Agent,
}

#[derive(Serialize)]
struct ProposeRequest<'a> {
    smiles: &'a str,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<&'a str>,
}

#[derive(Deserialize)]
struct WireProposal {
    smarts: String,
    log_prob: f64,
}

#[derive(Deserialize)]
struct ProposeResponse {
    proposals: Vec<WireProposal>,
}

#[derive(Serialize)]
struct RouteRequest<'a> {
    smiles: &'a str,
    n_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<&'a str>,
}

#[derive(Deserialize)]
struct RouteResponse {
    routes: Vec<RouteSample>,
}

impl HttpPolicy {
    pub fn new(base_url: &str) -> HttpPolicy {
        HttpPolicy::with_timeout(base_url, Duration::from_secs(60))
    }

    pub fn with_timeout(base_url: &str, timeout: Duration) -> HttpPolicy {
        let agent: Agent = Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpPolicy {
            base_url: base_url.trim_end_matches('/').to_string(),
            agent,
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    fn post<Req: Serialize, Resp: for<'de> Deserialize<'de>>(&self, path: &str, body: &Req) -> Result<Resp, PolicyError> {
        let url = format!("{}{path}", self.base_url);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| PolicyError::BackendUnavailable(format!("{url}: {e}")))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(PolicyError::BackendUnavailable(format!("{url}: HTTP {}", status.as_u16())));
        }
        resp.body_mut()
            .read_json()
            .map_err(|e| PolicyError::InvalidResponse(format!("{url}: {e}")))
    }
}

impl PolicyBackend for HttpPolicy {
    fn raw_proposals(&self, target: &Molecule, n: usize, condition: Option<&str>) -> Result<Vec<RawProposal>, PolicyError> {
        let req = ProposeRequest {
            smiles: target.canonical_smiles(),
            k: n,
            condition,
        };
        let resp: ProposeResponse = self.post("/v1/propose", &req)?;
        Ok(resp
            .proposals
            .into_iter()
            .map(|p| RawProposal {
                smarts: p.smarts,
                log_prob: p.log_prob,
                template: None,
            })
            .collect())
    }
}

impl RouteSampler for HttpPolicy {
    fn sample_routes(&self, target: &Molecule, n_samples: usize, condition: Option<&str>) -> Result<Vec<RouteSample>, PolicyError> {
        let req = RouteRequest {
            smiles: target.canonical_smiles(),
            n_samples,
            condition,
        };
        let resp: RouteResponse = self.post("/v1/propose_route", &req)?;
        Ok(resp.routes)
    }
}
