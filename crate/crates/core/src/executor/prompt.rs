//! Text shown to the human teammate for communication actions and the
//! questions asked at sensing nodes.

use crate::ground::GroundProblem;

fn arg(args: &[String], i: usize) -> &str {
    args.get(i).map(String::as_str).unwrap_or("?")
}

/// Utterance for a communication action, with the reason that gated it.
/// `None` for actions that are not communication.
pub fn prompt_text(action: &str, args: &[String], outcomes: &[String]) -> Option<String> {
    let (p, q) = (arg(args, 0), arg(args, 1));
    let replies = outcomes.join(" or ");
    let text = match action {
        "askHelp" => format!("I cannot reach {p}. Could you attach {p} to {q}?"),
        "offerHelp" => format!(
            "{p} is dangerous for you to handle. Shall I attach {p} to {q} instead? Reply {replies}."
        ),
        "confirmAttach" => format!("Are you going to attach {p} to {q}? Reply {replies}."),
        "requestToAttach" => format!("Please attach {p} to {q}."),
        "requestToUnhold" => format!("Please put down {p}."),
        _ => return None,
    };
    Some(text)
}

/// Question for a sensing node, answered by whoever observes the scene.
pub fn sensing_text(action: &str, args: &[String], outcomes: &[String]) -> String {
    let (p, q) = (arg(args, 0), arg(args, 1));
    let replies = outcomes.join(", ");
    match action {
        "sense_humanHolding" => format!("Is the human holding a part? ({replies})"),
        "sense_humanHoldingWhichPart" => format!("Which part is the human holding? ({replies})"),
        "sense_humanUnholding" => format!("Is the human putting down {p}? ({replies})"),
        "sense_humanAttachingWhere" => format!("Where on {q} is the human attaching {p}? ({replies})"),
        _ if args.is_empty() => format!("Observe {action}: {replies}"),
        _ => format!("Observe {action}({}): {replies}", args.join(",")),
    }
}

/// Outcome labels of a ground action, in declared order.
pub fn outcome_labels(p: &GroundProblem, action: &str, args: &[String]) -> Vec<String> {
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    p.find_action(action, &args)
        .map(|a| p.actions[a].outcomes.iter().map(|o| o.label.clone()).collect())
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn templates() {
        assert_eq!(
            prompt_text("askHelp", &s(&["leg2", "top1", "c2"]), &s(&["accept", "decline"])).unwrap(),
            "I cannot reach leg2. Could you attach leg2 to top1?"
        );
        assert_eq!(prompt_text("requestToUnhold", &s(&["leg1"]), &[]).unwrap(), "Please put down leg1.");
        let confirm = prompt_text("confirmAttach", &s(&["leg2", "top1"]), &s(&["yes", "no"])).unwrap();
        assert!(confirm.ends_with("Reply yes or no."));
        let offer = prompt_text("offerHelp", &s(&["foot1", "leg1", "hole"]), &s(&["accepted", "declined"])).unwrap();
        assert!(offer.contains("dangerous") && offer.contains("accepted or declined"));
        assert!(prompt_text("hold", &s(&["left", "leg1"]), &[]).is_none());
    }

    #[test]
    fn every_communication_kind_has_a_prompt() {
        for a in ["askHelp", "offerHelp", "confirmAttach", "requestToAttach", "requestToUnhold"] {
            assert!(prompt_text(a, &s(&["p", "q", "c"]), &s(&["x", "y"])).is_some(), "{a}");
        }
    }
}
